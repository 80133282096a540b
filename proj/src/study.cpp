// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "rcm/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "rcm/chebyshev.hpp"
#include "rcm/errors.hpp"
#include "rcm/estimator.hpp"
#include "rcm/stability.hpp"

namespace rcm {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t s = v.size();
  return s % 2 ? v[s / 2] : 0.5 * (v[s / 2 - 1] + v[s / 2]);
}

std::string mu_text(const Eigen::VectorXd& mu) {
  std::string s = "(";
  for (Index i = 0; i < mu.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(mu[i]);
  }
  return s + ")";
}

// Interpolant values on the interior nodes of a (coarser) grid, as an
// (nx-1) x (ny-1) matrix indexed like the interior dofs.
Eigen::MatrixXd eval_on_interior(const SpectralInterpolant<double>& s,
                                 const TensorGrid2D<double>& g) {
  Eigen::MatrixXd tx(g.nx() - 1, s.nx + 1), ty(g.ny() - 1, s.ny + 1);
  for (Index i = 1; i < g.nx(); ++i)
    for (Index k = 0; k <= s.nx; ++k)
      tx(i - 1, k) = chebyshev_value(k, g.x.nodes[i]);
  for (Index i = 1; i < g.ny(); ++i)
    for (Index k = 0; k <= s.ny; ++k)
      ty(i - 1, k) = chebyshev_value(k, g.y.nodes[i]);
  return tx * s.coeffs * ty.transpose();
}

// Shared skeleton of the reduced-convergence study; `solve` adapts the two
// model types to their online solvers.
template <typename Model, typename Solver>
std::vector<RbmConvergenceRow> rbm_worker(const AffineProblem& p,
                                          const Model& m,
                                          const Eigen::MatrixXd& test_mus,
                                          Solver&& solve) {
  if (test_mus.rows() < 1 || test_mus.cols() != p.domain().dim())
    throw std::invalid_argument("rbm study: test parameter matrix malformed");
  const Index nmax = m.size();
  const Index s = test_mus.rows();

  Eigen::MatrixXd truths(p.dofs(), s);
  Eigen::MatrixXd a_ops(p.qa(), s), a_rhss(p.qf(), s);
  BetaCache beta(p);
  beta.preload(m.stability);
  Eigen::VectorXd beta_test(s);
  for (Index j = 0; j < s; ++j) {
    const Eigen::VectorXd mu = test_mus.row(j).transpose();
    try {
      truths.col(j) = truth_solve(p, mu);
      beta_test[j] = beta.at(mu);
    } catch (const std::exception& e) {
      throw SolverError("rbm study: truth stage failed at mu=" + mu_text(mu) +
                        ": " + e.what());
    }
    a_ops.col(j) = p.op_coeffs(mu);
    a_rhss.col(j) = p.rhs_coeffs(mu);
  }

  const Eigen::MatrixXd& lattice = m.stability.points;
  std::vector<RbmConvergenceRow> rows;
  for (Index n = 1; n <= nmax; ++n) {
    RbmConvergenceRow row;
    row.n = n;
    std::vector<double> l2s, linfs;
    double max_dt = 0;
    for (Index j = 0; j < s; ++j) {
      const Eigen::VectorXd mu = test_mus.row(j).transpose();
      try {
        const OnlineSolution sol = solve(m, p, mu, n);
        const Eigen::VectorXd u_r = m.basis.leftCols(n) * sol.coeffs;
        const Eigen::VectorXd e = truths.col(j) - u_r;
        l2s.push_back(e.norm());
        linfs.push_back(e.cwiseAbs().maxCoeff());
        const double res = residual_norm_decomposed(m.cache, a_ops.col(j),
                                                    a_rhss.col(j), sol.coeffs);
        max_dt = std::max(max_dt, error_bound(res, beta_test[j]));
      } catch (const std::exception& e) {
        throw SolverError("rbm study: online stage failed at n=" +
                          std::to_string(n) + " mu=" + mu_text(mu) + ": " +
                          e.what());
      }
    }
    row.max_delta_test = max_dt;
    std::vector<double> l2sorted = l2s, linfsorted = linfs;
    std::sort(l2sorted.begin(), l2sorted.end());
    std::sort(linfsorted.begin(), linfsorted.end());
    row.min_l2 = l2sorted.front();
    row.max_l2 = l2sorted.back();
    row.med_l2 = median(l2s);
    row.min_linf = linfsorted.front();
    row.max_linf = linfsorted.back();
    row.med_linf = median(linfs);

    double max_train = 0;
    for (Index r = 0; r < lattice.rows(); ++r) {
      const Eigen::VectorXd mu = lattice.row(r).transpose();
      try {
        const OnlineSolution sol = solve(m, p, mu, n);
        const double res = residual_norm_decomposed(
            m.cache, p.op_coeffs(mu), p.rhs_coeffs(mu), sol.coeffs);
        max_train =
            std::max(max_train, error_bound(res, m.stability.values[r]));
      } catch (const std::exception& e) {
        throw SolverError("rbm study: training-lattice stage failed at n=" +
                          std::to_string(n) + " mu=" + mu_text(mu) + ": " +
                          e.what());
      }
    }
    row.max_delta_train = max_train;
    rows.push_back(row);
  }
  return rows;
}

template <typename Model, typename Solver>
TimingResult timing_worker(const AffineProblem& p, const Model& m, Index reps,
                           Solver&& solve) {
  if (reps < 1) throw std::invalid_argument("timing study: reps must be >= 1");
  TimingResult t;
  t.n = m.size();
  t.dofs = p.dofs();
  t.offline_seconds = m.train_seconds + m.stability.build_seconds;
  const Parameter mu = p.domain().center();

  volatile double sink = 0;
  const auto online_batch = [&](Index b) {
    const auto t0 = std::chrono::steady_clock::now();
    for (Index k = 0; k < b; ++k) {
      const OnlineSolution sol = solve(m, p, mu, -1);
      sink = sink + sol.coeffs[0];
    }
    return seconds_since(t0);
  };
  const auto truth_batch = [&](Index b) {
    const auto t0 = std::chrono::steady_clock::now();
    for (Index k = 0; k < b; ++k) {
      const Eigen::VectorXd u = truth_solve(p, mu);
      sink = sink + u[0];
    }
    return seconds_since(t0);
  };

  // Grow the batch until one measurement spans >= 10 ms, then take the
  // median per-solve time over the repetitions.
  const auto measure = [&](const std::function<double(Index)>& batch) {
    Index b = 1;
    double el = batch(b);
    while (el < 0.01 && b < (Index{1} << 22)) {
      b *= 4;
      el = batch(b);
    }
    std::vector<double> per;
    for (Index rep = 0; rep < reps; ++rep) per.push_back(batch(b) / b);
    return median(per);
  };

  t.online_seconds = measure(online_batch);
  t.truth_seconds = measure(truth_batch);
  t.online_per_truth = t.online_seconds / t.truth_seconds;
  t.offline_per_truth = t.offline_seconds / t.truth_seconds;
  return t;
}

}  // namespace

void write_csv(std::ostream& os, const CsvTable& t) {
  for (const std::string& c : t.comments) os << "# " << c << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) os << ",";
    os << t.columns[i];
  }
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ",";
      os << row[i];
    }
    os << "\n";
  }
}

void write_csv_file(const std::string& path, const CsvTable& t) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(os, t);
  os.flush();
  if (!os.good()) throw std::runtime_error("write failed for " + path);
}

std::vector<TruthConvergenceRow> study_truth_convergence(
    const ProblemSpec& base, const Eigen::VectorXd& mu,
    const std::vector<Index>& nx_list, Index ref_nx) {
  if (nx_list.empty())
    throw std::invalid_argument("truth study: nx list is empty");
  for (Index n : nx_list)
    if (n < 4 || n >= ref_nx)
      throw std::invalid_argument(
          "truth study: grid orders must be at least 4 and below the "
          "reference order");

  ProblemSpec spec = base;
  spec.nx = spec.ny = ref_nx;
  const AffineProblem ref = build_problem(spec);
  const Eigen::VectorXd u_ref = truth_solve(ref, mu);
  const SpectralInterpolant<double> ref_interp =
      cheb_coeffs_2d(ref.grid(), interior_to_full(ref.grid(), u_ref));

  std::vector<TruthConvergenceRow> rows;
  for (Index n : nx_list) {
    spec.nx = spec.ny = n;
    const AffineProblem p = build_problem(spec);
    const Eigen::VectorXd u = truth_solve(p, mu);
    const Eigen::MatrixXd ref_vals = eval_on_interior(ref_interp, p.grid());
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        umat(u.data(), p.grid().nx() - 1, p.grid().ny() - 1);
    const Eigen::MatrixXd diff = umat - ref_vals;
    rows.push_back({n, diff.norm(), diff.cwiseAbs().maxCoeff()});
  }
  return rows;
}

std::vector<RbmConvergenceRow> study_rbm_convergence(
    const AffineProblem& p, const LsModel& m,
    const Eigen::MatrixXd& test_mus) {
  return rbm_worker(p, m, test_mus,
                    [](const LsModel& model, const AffineProblem& prob,
                       const Parameter& mu, Index n) {
                      return ls_online_solve(model, prob, mu, n);
                    });
}

std::vector<RbmConvergenceRow> study_rbm_convergence(
    const AffineProblem& p, const ErcmModel& m,
    const Eigen::MatrixXd& test_mus) {
  return rbm_worker(p, m, test_mus,
                    [](const ErcmModel& model, const AffineProblem& prob,
                       const Parameter& mu, Index n) {
                      return ercm_online_solve(model, prob, mu, n);
                    });
}

std::vector<NaivePointsRow> study_naive_points(
    const AffineProblem& p, const ErcmModel& trained,
    const std::vector<Index>& coarse_orders, const Eigen::MatrixXd& test_mus) {
  if (test_mus.rows() < 1 || test_mus.cols() != p.domain().dim())
    throw std::invalid_argument(
        "naive-points study: test parameter matrix malformed");
  const Index s = test_mus.rows();
  Eigen::MatrixXd truths(p.dofs(), s);
  for (Index j = 0; j < s; ++j)
    truths.col(j) = truth_solve(p, test_mus.row(j).transpose());

  std::vector<NaivePointsRow> rows;
  const auto eval_model = [&](const ErcmModel& m, Index order) {
    for (Index n = 1; n <= m.size(); ++n) {
      NaivePointsRow row;
      row.n = n;
      row.coarse_order = order;
      row.best_l2 = std::numeric_limits<double>::quiet_NaN();
      for (Index j = 0; j < s; ++j) {
        const Eigen::VectorXd mu = test_mus.row(j).transpose();
        auto [mat, rhs] =
            ercm_online_system(m, p.op_coeffs(mu), p.rhs_coeffs(mu), n);
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(mat);
        double rc = lu.rcond();
        if (!std::isfinite(rc) || rc < 0) rc = 0;
        row.max_rcond = std::max(row.max_rcond, rc);
        const Eigen::VectorXd c = lu.solve(rhs);
        double err = std::numeric_limits<double>::quiet_NaN();
        if (c.allFinite() && rc >= std::numeric_limits<double>::epsilon())
          err = (truths.col(j) - m.basis.leftCols(n) * c).norm();
        if (std::isfinite(err)) {
          if (!(err >= row.best_l2)) row.best_l2 = err;
        } else {
          ++row.singular_count;
        }
      }
      rows.push_back(row);
    }
  };

  eval_model(trained, 0);
  for (Index order : coarse_orders) {
    if (order < 2)
      throw std::invalid_argument(
          "naive-points study: coarse orders must be at least 2");
    const TensorGrid2D<double> g = tensor_grid(order, order);
    Eigen::MatrixXd pts(g.interior_size(), 2);
    for (Index ix = 1; ix < g.nx(); ++ix)
      for (Index iy = 1; iy < g.ny(); ++iy) {
        pts(g.dof(ix, iy), 0) = g.x.nodes[ix];
        pts(g.dof(ix, iy), 1) = g.y.nodes[iy];
      }
    eval_model(ercm_with_points(p, trained, pts), order);
  }
  return rows;
}

TimingResult study_timing(const AffineProblem& p, const LsModel& m,
                          Index reps) {
  return timing_worker(p, m, reps,
                       [](const LsModel& model, const AffineProblem& prob,
                          const Parameter& mu, Index n) {
                         return ls_online_solve(model, prob, mu, n);
                       });
}

TimingResult study_timing(const AffineProblem& p, const ErcmModel& m,
                          Index reps) {
  return timing_worker(p, m, reps,
                       [](const ErcmModel& model, const AffineProblem& prob,
                          const Parameter& mu, Index n) {
                         return ercm_online_solve(model, prob, mu, n);
                       });
}

}  // namespace rcm
