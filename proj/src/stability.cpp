// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "rcm/stability.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

#include "rcm/errors.hpp"

namespace rcm {

namespace {

double dense_smallest_eigenvalue(const Eigen::MatrixXd& l) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l.transpose() * l,
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalError("stability: dense eigensolver failed to converge");
  return es.eigenvalues().minCoeff();
}

Eigen::VectorXd unit_start_vector(Index n) {
  // Fixed seed: beta is a deterministic function of the matrix alone.
  std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i)
    v[i] = 2.0 * (double(rng() >> 11) * 0x1p-53) - 1.0;
  const double norm = v.norm();
  return (norm > 0) ? Eigen::VectorXd(v / norm)
                    : Eigen::VectorXd(Eigen::VectorXd::Unit(n, 0));
}

}  // namespace

double smallest_squared_singular_value(const Eigen::MatrixXd& l,
                                       const StabilityOptions& opts) {
  const Index n = l.rows();
  if (n == 0 || l.cols() != n)
    throw std::invalid_argument("smallest_squared_singular_value: matrix must be square");
  if (!l.allFinite())
    throw std::invalid_argument("smallest_squared_singular_value: non-finite matrix");
  if (n == 1) return l(0, 0) * l(0, 0);

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(l);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu_t(l.transpose().eval());

  // theta_k estimates lambda_max((L^T L)^{-1}) = 1/beta. With unit v,
  // z = L^{-T} v gives theta = v^T (L^T L)^{-1} v = ||z||^2, and the next
  // iterate is w = L^{-1} z.
  Eigen::VectorXd v = unit_start_vector(n);
  double theta_prev = 0, delta_prev = 0;
  for (Index it = 0; it < opts.max_iterations; ++it) {
    const Eigen::VectorXd z = lu_t.solve(v);
    const Eigen::VectorXd w = lu.solve(z);
    const double theta = z.squaredNorm();
    const double wnorm = w.norm();
    if (!std::isfinite(theta) || !std::isfinite(wnorm) || wnorm == 0 || theta == 0)
      return dense_smallest_eigenvalue(l);

    const double delta = theta - theta_prev;
    if (it >= 2) {
      if (delta == 0) return 1.0 / theta;
      const double r = delta / delta_prev;
      if (r > 0 && r < 1) {
        // Geometric tail: remaining error ~ delta * r / (1 - r).
        if (std::abs(delta) * r / (1.0 - r) <= opts.rel_tol * theta)
          return 1.0 / theta;
      }
    }
    theta_prev = theta;
    delta_prev = delta;
    v = w / wnorm;
  }
  return dense_smallest_eigenvalue(l);
}

double stability_constant(const AffineProblem& p, const Parameter& mu,
                          const StabilityOptions& opts) {
  return smallest_squared_singular_value(p.operator_at(mu), opts);
}

double StabilityTable::min_value() const {
  if (values.size() == 0) throw std::invalid_argument("StabilityTable: empty table");
  return values.minCoeff();
}

Index StabilityTable::find_row(const Parameter& mu) const {
  for (Index r = 0; r < points.rows(); ++r)
    if ((points.row(r).transpose().array() == mu.array()).all()) return r;
  return -1;
}

StabilityTable stability_table(const AffineProblem& p,
                               const Eigen::MatrixXd& points,
                               const StabilityOptions& opts) {
  if (points.rows() == 0)
    throw std::invalid_argument("stability_table: empty sample set");
  StabilityTable t;
  t.points = points;
  t.values.resize(points.rows());
  const auto t0 = std::chrono::steady_clock::now();
  for (Index r = 0; r < points.rows(); ++r)
    t.values[r] = stability_constant(p, points.row(r).transpose(), opts);
  t.build_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return t;
}

double BetaCache::at(const Parameter& mu) {
  std::vector<double> key(mu.data(), mu.data() + mu.size());
  auto it = values_.find(key);
  if (it != values_.end()) return it->second;
  const double beta = stability_constant(*problem_, mu);
  values_.emplace(std::move(key), beta);
  return beta;
}

void BetaCache::preload(const StabilityTable& table) {
  for (Index r = 0; r < table.points.rows(); ++r) {
    const Eigen::VectorXd row = table.points.row(r).transpose();
    std::vector<double> key(row.data(), row.data() + row.size());
    values_.emplace(std::move(key), table.values[r]);
  }
}

}  // namespace rcm
