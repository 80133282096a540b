// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "rcm/ercm.hpp"

#include <chrono>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include "rcm/chebyshev.hpp"
#include "rcm/errors.hpp"

namespace rcm {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// Exact node lookup. Point coordinates taken from a grid are stored
// verbatim, so bitwise equality against the node arrays is the right test;
// anything else is off-grid and handled by interpolation.
Index find_dof(const TensorGrid2D<double>& g, double px, double py) {
  Index ix = -1, iy = -1;
  for (Index i = 1; i < g.nx(); ++i)
    if (g.x.nodes[i] == px) {
      ix = i;
      break;
    }
  for (Index i = 1; i < g.ny(); ++i)
    if (g.y.nodes[i] == py) {
      iy = i;
      break;
    }
  if (ix < 0 || iy < 0) return -1;
  return g.dof(ix, iy);
}

// Incremental construction of the point-value data. Appending never
// rewrites existing entries, so models trained to different sizes share
// their leading blocks bit for bit.
class ErcmBuilder {
 public:
  explicit ErcmBuilder(const AffineProblem& p)
      : p_(p),
        assembler_(p),
        points_(0, 2),
        point_dofs_(0),
        basis_(p.dofs(), 0),
        rhs_rows_(0, p.qf()),
        b_(0, 0),
        op_rows_(static_cast<std::size_t>(p.qa())) {}

  Index size() const { return basis_.cols(); }
  const EstimatorCache& cache() const { return assembler_.cache(); }

  // Collocation system over all current points (training sweeps).
  std::pair<Eigen::MatrixXd, Eigen::VectorXd> system(
      const Eigen::VectorXd& a_op, const Eigen::VectorXd& a_rhs) const {
    const Index n = size();
    Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(n, n);
    for (Index q = 0; q < p_.qa(); ++q)
      mat += a_op[q] * op_rows_[static_cast<std::size_t>(q)];
    Eigen::VectorXd rhs = rhs_rows_ * a_rhs;
    return {std::move(mat), std::move(rhs)};
  }

  // Point chosen as the largest-magnitude entry of the triangularized
  // snapshot. A remainder at rounding level means the snapshot is already
  // representable and the basis cannot grow.
  void append_greedy(const Eigen::VectorXd& u) {
    Eigen::VectorXd xi = triangularize(u);
    Index dof = 0;
    const double mag = xi.cwiseAbs().maxCoeff(&dof);
    if (!(mag > 1e-12 * u.cwiseAbs().maxCoeff()) || !std::isfinite(mag))
      throw DegenerateBasisError(
          "snapshot at iteration " + std::to_string(size() + 1) +
          " is numerically representable by the current basis");
    const double pivot = xi[dof];
    append_common(std::move(xi), p_.grid().dof_x(dof), p_.grid().dof_y(dof),
                  dof, pivot);
  }

  // Caller-supplied point. Degeneracy is not an error here: a zero or tiny
  // pivot is exactly what a bad point set produces, and the resulting
  // (near-)singular systems are the measurement.
  void append_fixed(const Eigen::VectorXd& u, double px, double py) {
    Eigen::VectorXd xi = triangularize(u);
    const Index dof = find_dof(p_.grid(), px, py);
    const double pivot =
        dof >= 0 ? xi[dof]
                 : interpolate_at(
                       cheb_coeffs_2d(p_.grid(),
                                      interior_to_full(p_.grid(), xi)),
                       px, py);
    append_common(std::move(xi), px, py, dof, pivot);
  }

  void finish(ErcmModel& m) {
    m.points = std::move(points_);
    m.point_dofs = std::move(point_dofs_);
    m.basis = std::move(basis_);
    m.op_rows = std::move(op_rows_);
    m.rhs_rows = std::move(rhs_rows_);
    m.b_matrix = std::move(b_);
    m.cache = assembler_.cache();
  }

 private:
  // Removes the part of u the current basis interpolates at the selected
  // points, so the remainder vanishes there (unit lower triangular solve).
  Eigen::VectorXd triangularize(const Eigen::VectorXd& u) const {
    const Index i = size();
    if (i == 0) return u;
    const auto ui = cheb_coeffs_2d(p_.grid(), interior_to_full(p_.grid(), u));
    Eigen::VectorXd uvals(i);
    for (Index k = 0; k < i; ++k)
      uvals[k] = interpolate_at(ui, points_(k, 0), points_(k, 1));
    const Eigen::VectorXd c =
        b_.triangularView<Eigen::Lower>().solve(uvals);
    return u - basis_ * c;
  }

  void append_common(Eigen::VectorXd xi, double px, double py, Index dof,
                     double pivot) {
    const Index i = size();
    if (pivot != 0.0 && std::isfinite(pivot)) xi /= pivot;
    const auto& g = p_.grid();
    xi_interp_.push_back(cheb_coeffs_2d(g, interior_to_full(g, xi)));
    std::vector<SpectralInterpolant<double>> lims;
    lims.reserve(static_cast<std::size_t>(p_.qa()));
    for (Index q = 0; q < p_.qa(); ++q)
      lims.push_back(cheb_coeffs_2d(
          g, interior_to_full(g, Eigen::VectorXd(p_.apply_term(q, xi)))));
    lxi_interp_.push_back(std::move(lims));

    points_.conservativeResize(i + 1, 2);
    points_(i, 0) = px;
    points_(i, 1) = py;
    point_dofs_.conservativeResize(i + 1);
    point_dofs_[i] = static_cast<int>(dof);
    basis_.conservativeResize(Eigen::NoChange, i + 1);
    basis_.col(i) = xi;

    for (Index q = 0; q < p_.qa(); ++q) {
      auto& rows = op_rows_[static_cast<std::size_t>(q)];
      rows.conservativeResize(i + 1, i + 1);
      const auto& lq = lxi_interp_;
      for (Index k = 0; k <= i; ++k)
        rows(k, i) = interpolate_at(lq[static_cast<std::size_t>(i)]
                                      [static_cast<std::size_t>(q)],
                                    points_(k, 0), points_(k, 1));
      for (Index j = 0; j < i; ++j)
        rows(i, j) = interpolate_at(lq[static_cast<std::size_t>(j)]
                                      [static_cast<std::size_t>(q)],
                                    points_(i, 0), points_(i, 1));
    }
    b_.conservativeResize(i + 1, i + 1);
    for (Index k = 0; k <= i; ++k)
      b_(k, i) = interpolate_at(xi_interp_[static_cast<std::size_t>(i)],
                                points_(k, 0), points_(k, 1));
    for (Index j = 0; j < i; ++j)
      b_(i, j) = interpolate_at(xi_interp_[static_cast<std::size_t>(j)],
                                points_(i, 0), points_(i, 1));
    rhs_rows_.conservativeResize(i + 1, Eigen::NoChange);
    for (Index q = 0; q < p_.qf(); ++q)
      rhs_rows_(i, q) = forcing_value(p_.spec().rhs[static_cast<std::size_t>(q)].first, px, py);
    assembler_.extend(basis_.col(i));
  }

  const AffineProblem& p_;
  EstimatorAssembler assembler_;
  Eigen::MatrixXd points_;
  Eigen::VectorXi point_dofs_;
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd rhs_rows_;
  Eigen::MatrixXd b_;
  std::vector<Eigen::MatrixXd> op_rows_;
  std::vector<SpectralInterpolant<double>> xi_interp_;
  std::vector<std::vector<SpectralInterpolant<double>>> lxi_interp_;
};

// One estimator sweep; `system(a_op, a_rhs)` must assemble the collocation
// system at the current basis size. Candidates failing numerically are
// skipped. Returns {argmax, max}; argmax == -1 when nothing was evaluable.
template <typename SystemFn>
std::pair<Index, double> sweep_max_bound(const AffineProblem& p,
                                         const EstimatorCache& cache,
                                         const Eigen::MatrixXd& lattice,
                                         const StabilityTable& table,
                                         const std::vector<char>& taken,
                                         SystemFn&& system) {
  Index argmax = -1;
  double best = -1;
  for (Index r = 0; r < lattice.rows(); ++r) {
    if (!taken.empty() && taken[static_cast<std::size_t>(r)]) continue;
    const Eigen::VectorXd mu = lattice.row(r).transpose();
    const Eigen::VectorXd a_op = p.op_coeffs(mu);
    const Eigen::VectorXd a_rhs = p.rhs_coeffs(mu);
    double delta;
    try {
      auto [mat, rhs] = system(a_op, a_rhs);
      const Eigen::PartialPivLU<Eigen::MatrixXd> lu(mat);
      const Eigen::VectorXd c = lu.solve(rhs);
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

std::pair<Eigen::MatrixXd, Eigen::VectorXd> ercm_system_at_points(
    const ErcmModel& m, const Eigen::MatrixXd& a_op,
    const Eigen::MatrixXd& a_rhs, Index n_active) {
  if (n_active < 1 || n_active > m.size())
    throw std::invalid_argument("ercm_system_at_points: n_active out of range");
  const Index n = n_active;
  const Index qa = static_cast<Index>(m.op_rows.size());
  if (a_op.rows() != n || a_op.cols() != qa)
    throw std::invalid_argument(
        "ercm_system_at_points: operator coefficients must be n_active x qa");
  if (a_rhs.rows() != n || a_rhs.cols() != m.rhs_rows.cols())
    throw std::invalid_argument(
        "ercm_system_at_points: forcing coefficients must be n_active x qf");
  Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(n, n);
  for (Index q = 0; q < qa; ++q)
    mat += a_op.col(q).asDiagonal() *
           m.op_rows[static_cast<std::size_t>(q)].topLeftCorner(n, n);
  Eigen::VectorXd rhs =
      (a_rhs.array() * m.rhs_rows.topRows(n).array()).rowwise().sum();
  return {std::move(mat), std::move(rhs)};
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> ercm_online_system(
    const ErcmModel& m, const Eigen::VectorXd& a_op,
    const Eigen::VectorXd& a_rhs, Index n_active) {
  return ercm_system_at_points(
      m, a_op.transpose().replicate(n_active, 1),
      a_rhs.transpose().replicate(n_active, 1), n_active);
}

OnlineSolution ercm_online_solve(const ErcmModel& m, const AffineProblem& p,
                                 const Parameter& mu, Index n_active) {
  const Index n = n_active < 0 ? m.size() : n_active;
  auto [mat, rhs] =
      ercm_online_system(m, p.op_coeffs(mu), p.rhs_coeffs(mu), n);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(mat);
  const double rc = lu.rcond();
  if (!(rc >= std::numeric_limits<double>::epsilon()))
    throw SingularSystemError(
        "reduced collocation system singular at n=" + std::to_string(n));
  OnlineSolution s;
  s.coeffs = lu.solve(rhs);
  s.rcond = rc;
  if (!s.coeffs.allFinite())
    throw SingularSystemError(
        "reduced collocation system produced non-finite coefficients at n=" +
        std::to_string(n));
  return s;
}

ErcmModel ercm_greedy_train(const AffineProblem& p, const TrainOptions& opts,
                            const StabilityTable* pretable,
                            const TrainCallback& cb) {
  if (opts.n_max < 1)
    throw std::invalid_argument("ercm_greedy_train: n_max must be >= 1");
  const Eigen::MatrixXd lattice = p.domain().train_points();
  if (pretable && (pretable->points.rows() != lattice.rows() ||
                   pretable->points.cols() != lattice.cols() ||
                   pretable->values.size() != lattice.rows()))
    throw std::invalid_argument(
        "ercm_greedy_train: supplied stability table does not match lattice");

  ErcmModel model;
  model.stability = pretable ? *pretable : stability_table(p, lattice);
  const auto t0 = std::chrono::steady_clock::now();

  std::mt19937_64 rng(opts.seed);
  const Index first = draw_index(rng, lattice.rows());
  std::vector<char> taken(static_cast<std::size_t>(lattice.rows()), 0);
  taken[static_cast<std::size_t>(first)] = 1;

  Eigen::MatrixXd mus(opts.n_max, p.domain().dim());
  mus.row(0) = lattice.row(first);
  ErcmBuilder builder(p);
  builder.append_greedy(truth_solve(p, mus.row(0).transpose()));
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
          "ercm_greedy_train: training lattice exhausted before reaching "
          "n_max");
    auto [argmax, best] = sweep_max_bound(
        p, builder.cache(), lattice, model.stability, taken,
        [&](const Eigen::VectorXd& a_op, const Eigen::VectorXd& a_rhs) {
          return builder.system(a_op, a_rhs);
        });
    if (argmax < 0)
      throw SolverError(
          "ercm_greedy_train: no evaluable candidate in estimator sweep at "
          "iteration " +
          std::to_string(i));
    if (best <= opts.tol) break;
    taken[static_cast<std::size_t>(argmax)] = 1;
    mus.row(n) = lattice.row(argmax);
    builder.append_greedy(truth_solve(p, mus.row(n).transpose()));
    ++n;
    model.log.push_back({i, mus.row(n - 1).transpose(), best});
    if (cb) cb(model.log.back());
  }

  model.selected_mus = mus.topRows(n);
  builder.finish(model);

  if (opts.ercm_end_mgs) {
    // Reconditioning pass: Euclidean Gram-Schmidt over the basis (spans are
    // nested, so prefixes are preserved), then re-triangularize against the
    // same points to restore the unit-diagonal structure.
    Eigen::MatrixXd q = model.basis;
    for (Index j = 0; j < n; ++j) {
      Eigen::VectorXd v = q.col(j);
      for (int pass = 0; pass < 2; ++pass)
        for (Index k = 0; k < j; ++k) v -= q.col(k).dot(v) * q.col(k);
      const double nrm = v.norm();
      if (!(nrm > 0) || !std::isfinite(nrm))
        throw NumericalError(
            "ercm_greedy_train: Gram-Schmidt breakdown at basis vector " +
            std::to_string(j + 1));
      q.col(j) = v / nrm;
    }
    const Eigen::MatrixXd points = model.points;
    ErcmBuilder rebuild(p);
    for (Index j = 0; j < n; ++j)
      rebuild.append_fixed(q.col(j), points(j, 0), points(j, 1));
    rebuild.finish(model);
  }

  auto [terminal_arg, terminal_max] = sweep_max_bound(
      p, model.cache, lattice, model.stability, {},
      [&](const Eigen::VectorXd& a_op, const Eigen::VectorXd& a_rhs) {
        return ercm_online_system(model, a_op, a_rhs, n);
      });
  model.terminal_max_delta =
      terminal_arg < 0 ? std::numeric_limits<double>::quiet_NaN()
                       : terminal_max;
  model.train_seconds = seconds_since(t0);
  return model;
}

ErcmModel ercm_with_points(const AffineProblem& p, const ErcmModel& trained,
                           const Eigen::MatrixXd& points) {
  if (points.cols() != 2)
    throw std::invalid_argument("ercm_with_points: points must be p x 2");
  const Index n = std::min<Index>(trained.size(), points.rows());
  if (n < 1)
    throw std::invalid_argument("ercm_with_points: no points or empty model");
  ErcmModel model;
  model.selected_mus = trained.selected_mus.topRows(n);
  model.stability = trained.stability;
  model.log.assign(trained.log.begin(),
                   trained.log.begin() + static_cast<std::ptrdiff_t>(n));
  ErcmBuilder builder(p);
  for (Index j = 0; j < n; ++j)
    builder.append_fixed(truth_solve(p, model.selected_mus.row(j).transpose()),
                         points(j, 0), points(j, 1));
  builder.finish(model);
  return model;
}

}  // namespace rcm
