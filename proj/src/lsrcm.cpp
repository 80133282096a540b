// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "rcm/lsrcm.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rcm/errors.hpp"

namespace rcm {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

Eigen::VectorXd apply_operator(const AffineProblem& p, const Eigen::VectorXd& a,
                               const Eigen::VectorXd& u) {
  Eigen::VectorXd r = a[0] * p.apply_term(0, u);
  for (Index q = 1; q < p.qa(); ++q) r += a[q] * p.apply_term(q, u);
  return r;
}

// One estimator sweep over the lattice; rows flagged in `taken` are skipped.
// Returns {argmax, max}; argmax == -1 when no candidate was evaluable.
// Candidates whose reduced solve or residual fails numerically are skipped:
// a failure at one training point must not abort the whole greedy stage.
std::pair<Index, double> sweep_max_bound(const AffineProblem& p,
                                         const EstimatorCache& cache,
                                         const Eigen::MatrixXd& lattice,
                                         const StabilityTable& table,
                                         const std::vector<char>& taken,
                                         Index n_active) {
  Index argmax = -1;
  double best = -1;
  for (Index r = 0; r < lattice.rows(); ++r) {
    if (!taken.empty() && taken[static_cast<std::size_t>(r)]) continue;
    const Eigen::VectorXd mu = lattice.row(r).transpose();
    const Eigen::VectorXd a_op = p.op_coeffs(mu);
    const Eigen::VectorXd a_rhs = p.rhs_coeffs(mu);
    double delta;
    try {
      auto [m, b] = ls_online_system(cache, a_op, a_rhs, n_active);
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
      if (ldlt.info() != Eigen::Success) continue;
      const Eigen::VectorXd c = ldlt.solve(b);
      if (!c.allFinite()) continue;
      const double res = residual_norm_decomposed(cache, a_op, a_rhs, c);
      delta = error_bound(res, table.values[r]);
    } catch (const NumericalError&) {
      continue;
    }
    if (!std::isfinite(delta)) continue;
    if (delta > best) {
      best = delta;
      argmax = r;
    }
  }
  return {argmax, best};
}

}  // namespace

std::pair<Eigen::MatrixXd, Eigen::VectorXd> ls_online_system(
    const EstimatorCache& cache, const Eigen::VectorXd& a_op,
    const Eigen::VectorXd& a_rhs, Index n_active) {
  if (n_active < 1 || n_active > cache.n)
    throw std::invalid_argument("ls_online_system: n_active out of range");
  if (a_op.size() != cache.qa || a_rhs.size() != cache.qf)
    throw std::invalid_argument("ls_online_system: coefficient size mismatch");
  const Index n = n_active;
  const Index qa = cache.qa;
  Eigen::MatrixXd m(n, n);
  Eigen::VectorXd rhs(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j)
      m(i, j) = a_op.dot(cache.lulu.block(i * qa, j * qa, qa, qa) * a_op);
    rhs(i) = a_rhs.dot(cache.flu.middleCols(i * qa, qa) * a_op);
  }
  return {std::move(m), std::move(rhs)};
}

OnlineSolution ls_online_solve(const LsModel& m, const AffineProblem& p,
                               const Parameter& mu, Index n_active) {
  const Index n = n_active < 0 ? m.size() : n_active;
  auto [mat, rhs] =
      ls_online_system(m.cache, p.op_coeffs(mu), p.rhs_coeffs(mu), n);
  // Condition gate via the eigenvalue ratio: LDLT's own estimate treats the
  // null pivots of an exactly rank-deficient normal matrix as benign.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mat,
                                                    Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  const double rc = (lmin > 0 && lmax > 0) ? lmin / lmax : 0.0;
  if (es.info() != Eigen::Success ||
      !(rc >= std::numeric_limits<double>::epsilon()))
    throw IllConditionedModelError(
        "reduced normal equations ill-conditioned at N=" + std::to_string(n));
  OnlineSolution s;
  s.coeffs = Eigen::LDLT<Eigen::MatrixXd>(mat).solve(rhs);
  s.rcond = rc;
  if (!s.coeffs.allFinite())
    throw IllConditionedModelError(
        "reduced normal equations produced non-finite coefficients at N=" +
        std::to_string(n));
  return s;
}

LsModel ls_greedy_train(const AffineProblem& p, const TrainOptions& opts,
                        const StabilityTable* pretable,
                        const TrainCallback& cb) {
  if (opts.n_max < 1)
    throw std::invalid_argument("ls_greedy_train: n_max must be >= 1");
  const Eigen::MatrixXd lattice = p.domain().train_points();
  if (pretable && (pretable->points.rows() != lattice.rows() ||
                   pretable->points.cols() != lattice.cols() ||
                   pretable->values.size() != lattice.rows()))
    throw std::invalid_argument(
        "ls_greedy_train: supplied stability table does not match lattice");

  LsModel model;
  model.stability = pretable ? *pretable : stability_table(p, lattice);
  const auto t0 = std::chrono::steady_clock::now();

  std::mt19937_64 rng(opts.seed);
  const Index first = draw_index(rng, lattice.rows());
  std::vector<char> taken(static_cast<std::size_t>(lattice.rows()), 0);
  taken[static_cast<std::size_t>(first)] = 1;

  const Index dofs = p.dofs();
  Eigen::MatrixXd snapshots(dofs, opts.n_max);
  Eigen::MatrixXd mus(opts.n_max, p.domain().dim());
  mus.row(0) = lattice.row(first);
  snapshots.col(0) = truth_solve(p, mus.row(0).transpose());
  EstimatorAssembler assembler(p);
  assembler.extend(snapshots.col(0));
  model.log.push_back(
      {1, mus.row(0).transpose(), std::numeric_limits<double>::quiet_NaN()});
  if (cb) cb(model.log.back());

  Index n = 1;
  for (Index i = 2; i <= opts.n_max; ++i) {
    bool all_taken = true;
    for (char t : taken)
      if (!t) {
        all_taken = false;
        break;
      }
    if (all_taken)
      throw SolverError(
          "ls_greedy_train: training lattice exhausted before reaching n_max");
    auto [argmax, best] =
        sweep_max_bound(p, assembler.cache(), lattice, model.stability, taken,
                        n);
    if (argmax < 0)
      throw SolverError(
          "ls_greedy_train: no evaluable candidate in estimator sweep at "
          "iteration " +
          std::to_string(i));
    if (best <= opts.tol) break;
    taken[static_cast<std::size_t>(argmax)] = 1;
    mus.row(n) = lattice.row(argmax);
    snapshots.col(n) = truth_solve(p, mus.row(n).transpose());
    assembler.extend(snapshots.col(n));
    ++n;
    model.log.push_back({i, mus.row(n - 1).transpose(), best});
    if (cb) cb(model.log.back());
  }

  model.selected_mus = mus.topRows(n);
  model.basis = snapshots.leftCols(n);

  // Weighted modified Gram-Schmidt in (u, v) -> (L(mu_c) u).(L(mu_c) v),
  // mu_c the domain center. The operator images are carried alongside the
  // vectors so each projection costs one dot product; a second sweep removes
  // the residual non-orthogonality left by the first.
  const Eigen::VectorXd a_c = p.op_coeffs(p.domain().center());
  Eigen::MatrixXd images(dofs, n);
  for (Index j = 0; j < n; ++j) {
    Eigen::VectorXd xi = model.basis.col(j);
    Eigen::VectorXd y = apply_operator(p, a_c, xi);
    for (int pass = 0; pass < 2; ++pass) {
      for (Index k = 0; k < j; ++k) {
        const double h = images.col(k).dot(y);
        xi -= h * model.basis.col(k);
        y -= h * images.col(k);
      }
    }
    const double nrm = y.norm();
    if (!(nrm > 0) || !std::isfinite(nrm))
      throw NumericalError(
          "ls_greedy_train: Gram-Schmidt breakdown at basis vector " +
          std::to_string(j + 1));
    model.basis.col(j) = xi / nrm;
    images.col(j) = y / nrm;
  }

  model.cache = estimator_cache(p, model.basis);

  auto [terminal_arg, terminal_max] =
      sweep_max_bound(p, model.cache, lattice, model.stability, {}, n);
  model.terminal_max_delta =
      terminal_arg < 0 ? std::numeric_limits<double>::quiet_NaN()
                       : terminal_max;
  model.train_seconds = seconds_since(t0);
  return model;
}

}  // namespace rcm
