// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef RCM_ERCM_HPP
#define RCM_ERCM_HPP

#include <Eigen/Dense>

#include <limits>
#include <utility>
#include <vector>

#include "rcm/estimator.hpp"
#include "rcm/problem.hpp"
#include "rcm/stability.hpp"
#include "rcm/training.hpp"

// Empirical reduced collocation: square collocation of the reduced equation
// at greedily selected physical points, with a triangular snapshot basis.

namespace rcm {

struct ErcmModel {
  Eigen::MatrixXd selected_mus;  // N x d, one greedy parameter pick per row
  Eigen::MatrixXd points;        // N x 2 collocation points (x, y)
  Eigen::VectorXi point_dofs;    // interior dof of each point, -1 if off-grid
  Eigen::MatrixXd basis;         // dofs x N triangular basis xi_j
  // op_rows[q](k, j) = (L_q xi_j) interpolated at point k: everything the
  // online collocation system needs, independent of the fine grid size.
  std::vector<Eigen::MatrixXd> op_rows;
  Eigen::MatrixXd rhs_rows;  // N x qf forcing term values at the points
  Eigen::MatrixXd b_matrix;  // B(i, j) = xi_j(x^i), unit lower triangular
  EstimatorCache cache;      // residual tensors over the xi basis
  StabilityTable stability;  // beta over the training lattice
  std::vector<TrainLogEntry> log;
  double terminal_max_delta = std::numeric_limits<double>::quiet_NaN();
  double train_seconds = 0;

  Index size() const { return selected_mus.rows(); }
};

// Collocation system from per-point coefficient values: a_op(k, q) and
// a_rhs(k, q) hold the coefficients evaluated at point k, so the assembly
// never touches fine-grid data and pointwise (non-affine) coefficients fit
// the same interface.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> ercm_system_at_points(
    const ErcmModel& m, const Eigen::MatrixXd& a_op,
    const Eigen::MatrixXd& a_rhs, Index n_active);

// Affine wrapper: one coefficient vector replicated across the points.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> ercm_online_system(
    const ErcmModel& m, const Eigen::VectorXd& a_op,
    const Eigen::VectorXd& a_rhs, Index n_active);

// Solves the reduced collocation system at mu; n_active = -1 uses the full
// basis. Condition beyond 1/epsilon raises SingularSystemError.
OnlineSolution ercm_online_solve(const ErcmModel& m, const AffineProblem& p,
                                 const Parameter& mu, Index n_active = -1);

// Greedy offline stage: parameters picked by estimator sweeps, points by the
// largest-magnitude entry of each triangularized snapshot. pretable, when
// given, must be the stability table of this problem's lattice.
ErcmModel ercm_greedy_train(const AffineProblem& p, const TrainOptions& opts,
                            const StabilityTable* pretable = nullptr,
                            const TrainCallback& cb = {});

// Rebuilds a model over caller-supplied collocation points (rows of (x, y))
// keeping the trained parameter picks and snapshots. Degenerate pivots are
// recorded rather than rejected: how a point set fails is data for the
// point-selection studies. Uses the first min(N, points.rows()) snapshots.
ErcmModel ercm_with_points(const AffineProblem& p, const ErcmModel& trained,
                           const Eigen::MatrixXd& points);

}  // namespace rcm

#endif  // RCM_ERCM_HPP
