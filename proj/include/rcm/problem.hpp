// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef RCM_PROBLEM_HPP
#define RCM_PROBLEM_HPP

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rcm/chebyshev.hpp"
#include "rcm/mu_expression.hpp"

// Affinely parametrized elliptic operators L(mu) = sum_q a_q(mu) L_q on the
// interior of a Chebyshev tensor grid with homogeneous Dirichlet data, plus
// the dense truth solver.

namespace rcm {

using Parameter = Eigen::VectorXd;

struct ParameterDomain {
  Eigen::VectorXd lo, hi;          // box bounds per component
  Eigen::VectorXi train_counts;    // training lattice points per component

  Index dim() const { return lo.size(); }
  Parameter center() const { return 0.5 * (lo + hi); }
  bool contains(const Parameter& mu) const;
  // Uniform lattice including the box faces, row-major over components
  // (first component slowest). A 1-count component collapses to its midpoint.
  Eigen::MatrixXd train_points() const;
};

// Operator term tags accepted in problem descriptions. An optional '-' or
// '+' prefix scales the term so that built-ins like -dxx keep their
// coefficient functions in the plain (1, mu1, ...) form.
enum class TermKind { kDxx, kXDxx, kDyy, kYDyy, kIdentity };

struct ProblemSpec {
  std::string name;
  Index nx = 0, ny = 0;  // grid orders
  ParameterDomain domain;
  std::vector<std::pair<std::string, std::string>> ops;  // (term tag, coeff expr)
  std::vector<std::pair<std::string, std::string>> rhs;  // (forcing tag, coeff expr)
};

// (1 + mu1 x) u_xx + (1 + mu2 y) u_yy = exp(4xy),
// mu in [-0.99, 0.99]^2, training lattice 64 x 64.
ProblemSpec diffusion_spec(Index nx);

// -u_xx - mu1 u_yy - mu2 u = -10 sin(8x(y-1)),
// mu in [0.1, 4] x [0, 2], training lattice 128 x 64.
ProblemSpec anisotropic_spec(Index nx);

// Named forcing functions a problem description may reference.
double forcing_value(const std::string& tag, double x, double y);

class AffineProblem {
 public:
  explicit AffineProblem(ProblemSpec spec);

  const ProblemSpec& spec() const { return spec_; }
  const std::string& name() const { return spec_.name; }
  const TensorGrid2D<double>& grid() const { return grid_; }
  const ParameterDomain& domain() const { return spec_.domain; }
  Index qa() const { return static_cast<Index>(terms_.size()); }
  Index qf() const { return static_cast<Index>(rhs_.size()); }
  Index dofs() const { return grid_.interior_size(); }

  Eigen::VectorXd op_coeffs(const Parameter& mu) const;   // a_q(mu), length qa
  Eigen::VectorXd rhs_coeffs(const Parameter& mu) const;  // a^f_q(mu), length qf

  // Dense interior matrix of term q (materialized on demand; terms are held
  // in Kronecker-factored form).
  Eigen::MatrixXd term_matrix(Index q) const;
  // L_q u without materializing the term.
  Eigen::VectorXd apply_term(Index q, const Eigen::VectorXd& u) const;
  // Dense interior L(mu) = sum_q a_q(mu) L_q.
  Eigen::MatrixXd operator_at(const Parameter& mu) const;

  const Eigen::VectorXd& rhs_vector(Index q) const;  // f_q at interior nodes
  const Eigen::MatrixXd& rhs_grid(Index q) const;    // f_q on the full grid
  Eigen::VectorXd rhs_at(const Parameter& mu) const;

 private:
  struct TermOp {
    TermKind kind;
    double scale;                       // from the tag's sign prefix
    MuExpression coeff;
    std::optional<Eigen::MatrixXd> ax;  // x-direction interior factor, identity if absent
    std::optional<Eigen::MatrixXd> ay;  // y-direction interior factor
  };
  struct Forcing {
    std::string tag;
    MuExpression coeff;
    Eigen::VectorXd interior;
    Eigen::MatrixXd full;
  };

  ProblemSpec spec_;
  TensorGrid2D<double> grid_;
  std::vector<TermOp> terms_;
  std::vector<Forcing> rhs_;
};

AffineProblem build_problem(const ProblemSpec& spec);
AffineProblem build_diffusion(Index nx);
AffineProblem build_anisotropic(Index nx);

// Dense LU solve of L(mu) u = f(mu); rejects solutions whose residual
// exceeds 1e-9 ||f||.
Eigen::VectorXd truth_solve(const AffineProblem& p, const Parameter& mu);

}  // namespace rcm

#endif  // RCM_PROBLEM_HPP
