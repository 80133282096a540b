// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "rcm/estimator.hpp"

#include <cmath>
#include <stdexcept>

#include "rcm/errors.hpp"

namespace rcm {

EstimatorAssembler::EstimatorAssembler(const AffineProblem& p) : problem_(&p) {
  cache_.qa = p.qa();
  cache_.qf = p.qf();
  cache_.ff.resize(p.qf(), p.qf());
  for (Index q3 = 0; q3 < p.qf(); ++q3)
    for (Index q4 = 0; q4 < p.qf(); ++q4)
      cache_.ff(q3, q4) = p.rhs_vector(q3).dot(p.rhs_vector(q4));
  cache_.lulu.resize(0, 0);
  cache_.flu.resize(p.qf(), 0);
}

void EstimatorAssembler::extend(const Eigen::VectorXd& u) {
  const AffineProblem& p = *problem_;
  if (u.size() != p.dofs())
    throw std::invalid_argument("EstimatorAssembler::extend: basis vector size mismatch");
  const Index j = cache_.n, qa = cache_.qa;

  std::vector<Eigen::VectorXd> imgs(qa);
  for (Index q = 0; q < qa; ++q) imgs[q] = p.apply_term(q, u);
  images_.push_back(std::move(imgs));

  cache_.lulu.conservativeResize((j + 1) * qa, (j + 1) * qa);
  cache_.flu.conservativeResize(cache_.qf, (j + 1) * qa);
  for (Index q2 = 0; q2 < qa; ++q2) {
    for (Index i = 0; i <= j; ++i) {
      for (Index q1 = 0; q1 < qa; ++q1) {
        const double v = images_[i][q1].dot(images_[j][q2]);
        cache_.lulu(i * qa + q1, j * qa + q2) = v;
        cache_.lulu(j * qa + q2, i * qa + q1) = v;
      }
    }
    for (Index q3 = 0; q3 < cache_.qf; ++q3)
      cache_.flu(q3, j * qa + q2) = p.rhs_vector(q3).dot(images_[j][q2]);
  }
  ++cache_.n;
}

EstimatorCache estimator_cache(const AffineProblem& p, const Eigen::MatrixXd& basis) {
  EstimatorAssembler a(p);
  for (Index j = 0; j < basis.cols(); ++j) a.extend(basis.col(j));
  return a.cache();
}

double residual_norm_direct(const AffineProblem& p, const Parameter& mu,
                            const Eigen::MatrixXd& basis,
                            const Eigen::VectorXd& coeffs) {
  if (coeffs.size() > basis.cols())
    throw std::invalid_argument("residual_norm_direct: more coefficients than basis vectors");
  Eigen::VectorXd r = p.rhs_at(mu);
  if (coeffs.size() > 0) {
    const Eigen::VectorXd u = basis.leftCols(coeffs.size()) * coeffs;
    const Eigen::VectorXd a = p.op_coeffs(mu);
    for (Index q = 0; q < p.qa(); ++q) r -= a[q] * p.apply_term(q, u);
  }
  return r.norm();
}

double residual_norm_decomposed(const EstimatorCache& cache,
                                const Eigen::VectorXd& a_op,
                                const Eigen::VectorXd& a_rhs,
                                const Eigen::VectorXd& coeffs) {
  const Index n = coeffs.size(), qa = cache.qa, qf = cache.qf;
  if (n > cache.n)
    throw std::invalid_argument("residual_norm_decomposed: cache smaller than coefficient vector");
  if (a_op.size() != qa || a_rhs.size() != qf)
    throw std::invalid_argument("residual_norm_decomposed: coefficient value count mismatch");

  const double e1 = a_rhs.dot(cache.ff * a_rhs);

  Eigen::VectorXd g(n * qa);  // g[j qa + q] = c_j a_q
  for (Index j = 0; j < n; ++j) g.segment(j * qa, qa) = coeffs[j] * a_op;
  const Index m = n * qa;
  const double e2 = g.dot(cache.lulu.topLeftCorner(m, m) * g);
  const double e3 = a_rhs.dot(cache.flu.leftCols(m) * g);

  const double radicand = e1 - 2.0 * e3 + e2;
  if (radicand < 0) {
    if (radicand >= -1e-12 * e1) return 0.0;
    throw NumericalError("decomposed residual: negative radicand beyond cancellation tolerance");
  }
  return std::sqrt(radicand);
}

double error_bound(double residual_norm, double beta_lb) {
  if (!(beta_lb > 0) || !std::isfinite(beta_lb))
    throw InvalidStabilityError("error bound requires a positive finite stability constant");
  return residual_norm / std::sqrt(beta_lb);
}

}  // namespace rcm
