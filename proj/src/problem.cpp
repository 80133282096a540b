// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "rcm/problem.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <stdexcept>

#include "rcm/errors.hpp"

namespace rcm {

bool ParameterDomain::contains(const Parameter& mu) const {
  if (mu.size() != dim()) return false;
  return (mu.array() >= lo.array()).all() && (mu.array() <= hi.array()).all();
}

Eigen::MatrixXd ParameterDomain::train_points() const {
  const Index d = dim();
  Index total = 1;
  for (Index k = 0; k < d; ++k) {
    if (train_counts[k] < 1)
      throw std::invalid_argument("ParameterDomain: training counts must be >= 1");
    total *= train_counts[k];
  }
  Eigen::MatrixXd pts(total, d);
  for (Index row = 0; row < total; ++row) {
    Index rem = row;
    for (Index k = d - 1; k >= 0; --k) {
      const Index c = train_counts[k];
      const Index idx = rem % c;
      rem /= c;
      pts(row, k) = (c == 1) ? 0.5 * (lo[k] + hi[k])
                             : lo[k] + (hi[k] - lo[k]) * double(idx) / double(c - 1);
    }
  }
  return pts;
}

namespace {

struct ParsedTag {
  TermKind kind;
  double scale;
};

ParsedTag parse_term_tag(const std::string& tag) {
  std::string t = tag;
  double scale = 1.0;
  while (!t.empty() && (t.front() == '-' || t.front() == '+')) {
    if (t.front() == '-') scale = -scale;
    t.erase(t.begin());
  }
  if (t == "dxx") return {TermKind::kDxx, scale};
  if (t == "x*dxx") return {TermKind::kXDxx, scale};
  if (t == "dyy") return {TermKind::kDyy, scale};
  if (t == "y*dyy") return {TermKind::kYDyy, scale};
  if (t == "identity") return {TermKind::kIdentity, scale};
  throw std::invalid_argument("unknown operator term tag '" + tag + "'");
}

// Interior vectors are row-major in (x index, y index); a Kronecker-factored
// term Ax (x) Ay acts as reshape(Ax U Ay^T).
using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

}  // namespace

ProblemSpec diffusion_spec(Index nx) {
  ProblemSpec s;
  s.name = "diffusion";
  s.nx = s.ny = nx;
  s.domain.lo = Eigen::Vector2d(-0.99, -0.99);
  s.domain.hi = Eigen::Vector2d(0.99, 0.99);
  s.domain.train_counts = Eigen::Vector2i(64, 64);
  s.ops = {{"dxx", "1"}, {"x*dxx", "mu1"}, {"dyy", "1"}, {"y*dyy", "mu2"}};
  s.rhs = {{"exp(4*x*y)", "1"}};
  return s;
}

ProblemSpec anisotropic_spec(Index nx) {
  ProblemSpec s;
  s.name = "anisotropic";
  s.nx = s.ny = nx;
  s.domain.lo = Eigen::Vector2d(0.1, 0.0);
  s.domain.hi = Eigen::Vector2d(4.0, 2.0);
  s.domain.train_counts = Eigen::Vector2i(128, 64);
  s.ops = {{"-dxx", "1"}, {"-dyy", "mu1"}, {"-identity", "mu2"}};
  s.rhs = {{"-10*sin(8*x*(y-1))", "1"}};
  return s;
}

double forcing_value(const std::string& tag, double x, double y) {
  if (tag == "one") return 1.0;
  if (tag == "zero") return 0.0;
  if (tag == "exp(4*x*y)") return std::exp(4.0 * x * y);
  if (tag == "-10*sin(8*x*(y-1))") return -10.0 * std::sin(8.0 * x * (y - 1.0));
  throw std::invalid_argument("unknown forcing tag '" + tag + "'");
}

AffineProblem::AffineProblem(ProblemSpec spec) : spec_(std::move(spec)) {
  if (spec_.nx < 4 || spec_.ny < 4)
    throw std::invalid_argument("AffineProblem: grid order must be >= 4");
  if (spec_.ops.empty() || spec_.rhs.empty())
    throw std::invalid_argument("AffineProblem: need at least one operator and rhs term");
  if (spec_.domain.dim() < 1 || spec_.domain.dim() != spec_.domain.hi.size() ||
      spec_.domain.dim() != spec_.domain.train_counts.size())
    throw std::invalid_argument("AffineProblem: malformed parameter domain");
  grid_ = tensor_grid<double>(spec_.nx, spec_.ny);

  const Index m = grid_.nx() - 1, n = grid_.ny() - 1;
  const Eigen::MatrixXd d2x = cheb_diff(grid_.x, 2).matrix.block(1, 1, m, m);
  const Eigen::MatrixXd d2y = cheb_diff(grid_.y, 2).matrix.block(1, 1, n, n);
  const Eigen::VectorXd xi = grid_.x.nodes.segment(1, m);
  const Eigen::VectorXd yi = grid_.y.nodes.segment(1, n);

  for (const auto& [tag, expr] : spec_.ops) {
    ParsedTag pt = parse_term_tag(tag);
    TermOp op{pt.kind, pt.scale, MuExpression::parse(expr), std::nullopt, std::nullopt};
    if (op.coeff.max_mu_index() > spec_.domain.dim())
      throw std::invalid_argument("operator coefficient '" + expr +
                                  "' references a parameter beyond the domain dimension");
    switch (pt.kind) {
      case TermKind::kDxx:
        op.ax = d2x;
        break;
      case TermKind::kXDxx:
        op.ax = xi.asDiagonal() * d2x;
        break;
      case TermKind::kDyy:
        op.ay = d2y;
        break;
      case TermKind::kYDyy:
        op.ay = yi.asDiagonal() * d2y;
        break;
      case TermKind::kIdentity:
        break;
    }
    terms_.push_back(std::move(op));
  }

  for (const auto& [tag, expr] : spec_.rhs) {
    Forcing f{tag, MuExpression::parse(expr), {}, {}};
    if (f.coeff.max_mu_index() > spec_.domain.dim())
      throw std::invalid_argument("rhs coefficient '" + expr +
                                  "' references a parameter beyond the domain dimension");
    f.full = sample_full<double>(grid_, [&](double x, double y) { return forcing_value(tag, x, y); });
    f.interior = sample_interior<double>(grid_, [&](double x, double y) { return forcing_value(tag, x, y); });
    rhs_.push_back(std::move(f));
  }
}

Eigen::VectorXd AffineProblem::op_coeffs(const Parameter& mu) const {
  Eigen::VectorXd a(qa());
  for (Index q = 0; q < qa(); ++q) a[q] = terms_[q].coeff(mu);
  return a;
}

Eigen::VectorXd AffineProblem::rhs_coeffs(const Parameter& mu) const {
  Eigen::VectorXd a(qf());
  for (Index q = 0; q < qf(); ++q) a[q] = rhs_[q].coeff(mu);
  return a;
}

Eigen::MatrixXd AffineProblem::term_matrix(Index q) const {
  const TermOp& t = terms_.at(q);
  const Index m = grid_.nx() - 1, n = grid_.ny() - 1;
  const Eigen::MatrixXd im = Eigen::MatrixXd::Identity(m, m);
  const Eigen::MatrixXd in = Eigen::MatrixXd::Identity(n, n);
  return t.scale * Eigen::kroneckerProduct(t.ax ? *t.ax : im, t.ay ? *t.ay : in).eval();
}

Eigen::VectorXd AffineProblem::apply_term(Index q, const Eigen::VectorXd& u) const {
  const TermOp& t = terms_.at(q);
  const Index m = grid_.nx() - 1, n = grid_.ny() - 1;
  if (u.size() != m * n) throw std::invalid_argument("apply_term: dof size mismatch");
  RowMajorMap umat(u.data(), m, n);
  Eigen::MatrixXd r;
  if (t.ax && t.ay)
    r = (*t.ax) * umat * t.ay->transpose();
  else if (t.ax)
    r = (*t.ax) * umat;
  else if (t.ay)
    r = umat * t.ay->transpose();
  else
    r = umat;
  r *= t.scale;
  Eigen::VectorXd out(m * n);
  for (Index i = 0; i < m; ++i) out.segment(i * n, n) = r.row(i).transpose();
  return out;
}

Eigen::MatrixXd AffineProblem::operator_at(const Parameter& mu) const {
  const Eigen::VectorXd a = op_coeffs(mu);
  const Index m = grid_.nx() - 1, n = grid_.ny() - 1;
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(m * n, m * n);
  for (Index q = 0; q < qa(); ++q) {
    const TermOp& t = terms_[q];
    const double w = a[q] * t.scale;
    if (w == 0.0) continue;
    if (!t.ax && !t.ay) {
      l.diagonal().array() += w;
    } else if (t.ax && !t.ay) {
      for (Index i = 0; i < m; ++i)
        for (Index k = 0; k < m; ++k)
          l.block(i * n, k * n, n, n).diagonal().array() += w * (*t.ax)(i, k);
    } else if (!t.ax && t.ay) {
      for (Index i = 0; i < m; ++i) l.block(i * n, i * n, n, n) += w * (*t.ay);
    } else {
      for (Index i = 0; i < m; ++i)
        for (Index k = 0; k < m; ++k)
          l.block(i * n, k * n, n, n) += (w * (*t.ax)(i, k)) * (*t.ay);
    }
  }
  return l;
}

const Eigen::VectorXd& AffineProblem::rhs_vector(Index q) const { return rhs_.at(q).interior; }
const Eigen::MatrixXd& AffineProblem::rhs_grid(Index q) const { return rhs_.at(q).full; }

Eigen::VectorXd AffineProblem::rhs_at(const Parameter& mu) const {
  const Eigen::VectorXd a = rhs_coeffs(mu);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(dofs());
  for (Index q = 0; q < qf(); ++q) f += a[q] * rhs_[q].interior;
  return f;
}

AffineProblem build_problem(const ProblemSpec& spec) { return AffineProblem(spec); }
AffineProblem build_diffusion(Index nx) { return AffineProblem(diffusion_spec(nx)); }
AffineProblem build_anisotropic(Index nx) { return AffineProblem(anisotropic_spec(nx)); }

Eigen::VectorXd truth_solve(const AffineProblem& p, const Parameter& mu) {
  const Eigen::MatrixXd l = p.operator_at(mu);
  const Eigen::VectorXd f = p.rhs_at(mu);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(l);
  Eigen::VectorXd u = lu.solve(f);
  const double res = (f - l * u).norm();
  if (!u.allFinite() || res > 1e-9 * f.norm())
    throw SolverError("truth_solve: residual " + std::to_string(res) +
                      " above accept threshold for " + p.name());
  return u;
}

}  // namespace rcm
