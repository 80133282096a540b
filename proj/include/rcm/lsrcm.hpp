// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef RCM_LSRCM_HPP
#define RCM_LSRCM_HPP

#include <Eigen/Dense>

#include <limits>
#include <utility>
#include <vector>

#include "rcm/estimator.hpp"
#include "rcm/problem.hpp"
#include "rcm/stability.hpp"
#include "rcm/training.hpp"

// Least-squares reduced collocation: greedy offline training and the
// N-independent online solve of the normal equations over the snapshot space.

namespace rcm {

struct LsModel {
  Eigen::MatrixXd selected_mus;  // N x d, one greedy pick per row
  Eigen::MatrixXd basis;         // dofs x N, orthonormal in the L(mu_c)-weighted product
  // cache.lulu doubles as the normal-equation gram tensor
  // (L_q1 xi_i).(L_q2 xi_j); cache.flu holds (L_q1 xi_i).f_q3.
  EstimatorCache cache;
  StabilityTable stability;  // beta over the training lattice
  std::vector<TrainLogEntry> log;
  double terminal_max_delta = std::numeric_limits<double>::quiet_NaN();
  double train_seconds = 0;

  Index size() const { return selected_mus.rows(); }
};

// Normal equations assembled from the cache tensors and the affine
// coefficient values alone: cost depends on n_active, Q_a, Q_f only.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> ls_online_system(
    const EstimatorCache& cache, const Eigen::VectorXd& a_op,
    const Eigen::VectorXd& a_rhs, Index n_active);

// Solves the reduced normal equations at mu; n_active = -1 uses the full
// basis. Condition beyond 1/epsilon raises IllConditionedModelError.
OnlineSolution ls_online_solve(const LsModel& m, const AffineProblem& p,
                               const Parameter& mu, Index n_active = -1);

// Greedy offline stage: estimator sweeps over the training lattice, argmax
// selection, truth snapshots, then one weighted modified Gram-Schmidt pass
// over the collected snapshots and a tensor rebuild on the stable basis.
// pretable, when given, must be the stability table of this problem's
// lattice and skips the most expensive offline step.
LsModel ls_greedy_train(const AffineProblem& p, const TrainOptions& opts,
                        const StabilityTable* pretable = nullptr,
                        const TrainCallback& cb = {});

}  // namespace rcm

#endif  // RCM_LSRCM_HPP
