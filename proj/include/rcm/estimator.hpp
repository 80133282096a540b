// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef RCM_ESTIMATOR_HPP
#define RCM_ESTIMATOR_HPP

#include <Eigen/Dense>

#include <vector>

#include "rcm/problem.hpp"

// A posteriori error bound Delta(mu) = ||f(mu) - L(mu) u^(n)|| / sqrt(beta_LB)
// and the three-term residual decomposition that makes its online cost
// independent of the fine-grid size.

namespace rcm {

// Offline inner-product tensors. Flat layout packs (basis index j, operator
// term q) into column/row j*qa + q.
struct EstimatorCache {
  Index n = 0, qa = 0, qf = 0;
  Eigen::MatrixXd ff;    // qf x qf,            f_q3 . f_q4
  Eigen::MatrixXd lulu;  // (n qa) x (n qa),    (L_q1 u_i) . (L_q2 u_j)
  Eigen::MatrixXd flu;   // qf x (n qa),        f_q3 . (L_q1 u_j)
};

// Incremental builder; keeps the fine-grid images L_q u_j so that extending
// by one basis vector only computes the new row/column entries. The images
// also feed reduced-point evaluation in the collocation method.
class EstimatorAssembler {
 public:
  explicit EstimatorAssembler(const AffineProblem& p);

  void extend(const Eigen::VectorXd& u);
  const EstimatorCache& cache() const { return cache_; }
  const Eigen::VectorXd& image(Index j, Index q) const { return images_.at(j).at(q); }
  Index size() const { return cache_.n; }

 private:
  const AffineProblem* problem_;
  EstimatorCache cache_;
  std::vector<std::vector<Eigen::VectorXd>> images_;  // [j][q] = L_q u_j
};

// Cache over the leading columns of basis; identical arithmetic to repeated
// extend() calls, so incremental and from-scratch builds agree bit for bit.
EstimatorCache estimator_cache(const AffineProblem& p, const Eigen::MatrixXd& basis);

// ||f(mu) - L(mu) basis.leftCols(|coeffs|) coeffs|| assembled on the fine grid.
double residual_norm_direct(const AffineProblem& p, const Parameter& mu,
                            const Eigen::MatrixXd& basis,
                            const Eigen::VectorXd& coeffs);

// sqrt(e1 - 2 e3 + e2) from the cache tensors and the affine coefficient
// values alone. The radicand is nonnegative in exact arithmetic; cancellation
// within -1e-12 e1 clamps to zero, anything below that is an error.
double residual_norm_decomposed(const EstimatorCache& cache,
                                const Eigen::VectorXd& a_op,
                                const Eigen::VectorXd& a_rhs,
                                const Eigen::VectorXd& coeffs);

// residual / sqrt(beta_lb); beta_lb must be positive and finite.
double error_bound(double residual_norm, double beta_lb);

}  // namespace rcm

#endif  // RCM_ESTIMATOR_HPP
