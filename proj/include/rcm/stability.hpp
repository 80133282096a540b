// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef RCM_STABILITY_HPP
#define RCM_STABILITY_HPP

#include <Eigen/Dense>

#include <map>
#include <vector>

#include "rcm/problem.hpp"

// Stability constant beta(mu) = sigma_min(L(mu))^2, the smallest eigenvalue
// of L^T L, which certifies the a posteriori error bound.

namespace rcm {

struct StabilityOptions {
  double rel_tol = 1e-10;      // relative accuracy target for the eigenvalue
  Index max_iterations = 400;  // inverse-iteration cap before the dense fallback
};

// Inverse power iteration on (L^T L)^{-1} via one LU of L and one of the
// explicit transpose (forward solves on a second factorization beat Eigen's
// transposed solves by a wide margin). A geometric-tail estimate on the
// Rayleigh-quotient increments decides convergence; stalls and non-finite
// data fall back to a dense symmetric eigensolver.
double smallest_squared_singular_value(const Eigen::MatrixXd& l,
                                       const StabilityOptions& opts = {});

double stability_constant(const AffineProblem& p, const Parameter& mu,
                          const StabilityOptions& opts = {});

// beta tabulated over a parameter sample set (one row of points per sample).
struct StabilityTable {
  Eigen::MatrixXd points;
  Eigen::VectorXd values;
  double build_seconds = 0;

  double min_value() const;
  Index find_row(const Parameter& mu) const;  // exact match, -1 if absent
};

StabilityTable stability_table(const AffineProblem& p,
                               const Eigen::MatrixXd& points,
                               const StabilityOptions& opts = {});

// Exact-mu memoization of beta: training lattices are preloaded from the
// model's table, arbitrary certification parameters are computed on demand.
class BetaCache {
 public:
  explicit BetaCache(const AffineProblem& p) : problem_(&p) {}

  double at(const Parameter& mu);
  void preload(const StabilityTable& table);
  Index size() const { return static_cast<Index>(values_.size()); }

 private:
  const AffineProblem* problem_;
  std::map<std::vector<double>, double> values_;
};

}  // namespace rcm

#endif  // RCM_STABILITY_HPP
