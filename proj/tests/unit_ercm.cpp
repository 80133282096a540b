// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "rcm/ercm.hpp"
#include "rcm/errors.hpp"
#include "rcm/problem.hpp"
#include "rcm/training.hpp"

using namespace rcm;

namespace {

AffineProblem small_anisotropic(Index nx, int cx = 6, int cy = 6) {
  auto spec = anisotropic_spec(nx);
  spec.domain.train_counts = Eigen::Vector2i(cx, cy);
  return build_problem(spec);
}

TrainOptions opts_for(Index n_max, double tol = 0.0, std::uint64_t seed = 17) {
  TrainOptions o;
  o.n_max = n_max;
  o.tol = tol;
  o.seed = seed;
  return o;
}

// Interpolated evaluation of an interior vector at a physical point,
// assembled from scratch (dual route to the builder's bookkeeping).
double eval_interior(const AffineProblem& p, const Eigen::VectorXd& v,
                     double px, double py) {
  const auto s = cheb_coeffs_2d(p.grid(), interior_to_full(p.grid(), v));
  return interpolate_at(s, px, py);
}

}  // namespace

TEST_CASE("the first basis vector is the pivot-normalized first snapshot") {
  const auto p = small_anisotropic(10);
  const ErcmModel m = ercm_greedy_train(p, opts_for(3));
  REQUIRE(m.size() == 3);

  const Eigen::VectorXd u1 = truth_solve(p, m.selected_mus.row(0).transpose());
  REQUIRE(m.point_dofs[0] >= 0);  // greedy points live on the grid
  const double pivot = u1[m.point_dofs[0]];
  CHECK(m.basis.col(0) == u1 / pivot);
  CHECK(m.basis.col(0)[m.point_dofs[0]] == 1.0);
  CHECK(m.basis.col(0).cwiseAbs().maxCoeff() <= 1.0);

  // The recorded coordinates are the grid coordinates of the pivot dof.
  CHECK(m.points(0, 0) == p.grid().dof_x(m.point_dofs[0]));
  CHECK(m.points(0, 1) == p.grid().dof_y(m.point_dofs[0]));
}

TEST_CASE("the point-value matrix is unit lower triangular") {
  const auto p = small_anisotropic(10);
  const ErcmModel m = ercm_greedy_train(p, opts_for(4));
  REQUIRE(m.b_matrix.rows() == 4);
  for (Index i = 0; i < 4; ++i) {
    CHECK(std::abs(m.b_matrix(i, i) - 1.0) <= 1e-10);
    for (Index j = i + 1; j < 4; ++j) CHECK(std::abs(m.b_matrix(i, j)) <= 1e-10);
  }

  // Independently: later basis vectors vanish at earlier points.
  for (Index j = 1; j < 4; ++j)
    for (Index i = 0; i < j; ++i)
      CHECK(std::abs(eval_interior(p, m.basis.col(j), m.points(i, 0),
                                   m.points(i, 1))) <= 1e-10);
}

TEST_CASE("trained models reproduce their snapshots online") {
  const auto p = small_anisotropic(10);
  const ErcmModel m = ercm_greedy_train(p, opts_for(4));
  for (Index i = 0; i < m.size(); ++i) {
    const Parameter mu = m.selected_mus.row(i);
    const Eigen::VectorXd truth = truth_solve(p, mu);
    const OnlineSolution sol = ercm_online_solve(m, p, mu);
    CHECK((m.basis * sol.coeffs - truth).norm() <= 1e-8 * truth.norm());
  }
  CHECK(m.train_seconds > 0);
  CHECK(m.log.size() == 4);
  REQUIRE(m.op_rows.size() == std::size_t(p.qa()));
  for (const auto& r : m.op_rows) {
    CHECK(r.rows() == 4);
    CHECK(r.cols() == 4);
  }
  CHECK(m.rhs_rows.rows() == 4);
  CHECK(m.rhs_rows.cols() == p.qf());
  CHECK(m.cache.n == 4);
}

TEST_CASE("the collocation system equals direct interpolation of the images") {
  const auto p = small_anisotropic(10);
  const ErcmModel m = ercm_greedy_train(p, opts_for(4));
  const Eigen::MatrixXd mus = sample_parameters(p.domain(), 4, 5);
  for (Index r = 0; r < mus.rows(); ++r) {
    const Parameter mu = mus.row(r);
    const Eigen::VectorXd a_op = p.op_coeffs(mu), a_rhs = p.rhs_coeffs(mu);
    const auto [mat, rhs] = ercm_online_system(m, a_op, a_rhs, 4);

    Eigen::MatrixXd mat_ref = Eigen::MatrixXd::Zero(4, 4);
    Eigen::VectorXd rhs_ref = Eigen::VectorXd::Zero(4);
    for (Index k = 0; k < 4; ++k) {
      for (Index j = 0; j < 4; ++j)
        for (Index q = 0; q < p.qa(); ++q)
          mat_ref(k, j) += a_op[q] * eval_interior(p, p.apply_term(q, m.basis.col(j)),
                                                   m.points(k, 0), m.points(k, 1));
      for (Index q = 0; q < p.qf(); ++q)
        rhs_ref[k] += a_rhs[q] * forcing_value(p.spec().rhs[q].first,
                                               m.points(k, 0), m.points(k, 1));
    }
    CHECK((mat - mat_ref).cwiseAbs().maxCoeff() <=
          1e-10 * mat_ref.cwiseAbs().maxCoeff());
    CHECK((rhs - rhs_ref).cwiseAbs().maxCoeff() <=
          1e-10 * (rhs_ref.cwiseAbs().maxCoeff() + 1));
  }
}

TEST_CASE("greedy growth is nested: a shorter run is a bitwise prefix") {
  const auto p = small_anisotropic(10);
  const ErcmModel m5 = ercm_greedy_train(p, opts_for(5));
  const ErcmModel m3 = ercm_greedy_train(p, opts_for(3));

  CHECK(m3.selected_mus == m5.selected_mus.topRows(3));
  CHECK(m3.points == m5.points.topRows(3));
  CHECK(m3.point_dofs == m5.point_dofs.head(3));
  CHECK(m3.basis == m5.basis.leftCols(3));
  CHECK(m3.b_matrix == m5.b_matrix.topLeftCorner(3, 3));
  CHECK(m3.rhs_rows == m5.rhs_rows.topRows(3));
  for (std::size_t q = 0; q < m3.op_rows.size(); ++q)
    CHECK(m3.op_rows[q] == m5.op_rows[q].topLeftCorner(3, 3));
}

TEST_CASE("truncated solves coincide with the smaller model bitwise") {
  const auto p = small_anisotropic(10);
  const ErcmModel m5 = ercm_greedy_train(p, opts_for(5));
  const ErcmModel m3 = ercm_greedy_train(p, opts_for(3));
  const Parameter mu = Eigen::Vector2d(2.3, 0.7);
  const OnlineSolution full = ercm_online_solve(m3, p, mu);
  const OnlineSolution cut = ercm_online_solve(m5, p, mu, 3);
  CHECK(full.coeffs == cut.coeffs);
  CHECK(full.rcond == cut.rcond);
}

TEST_CASE("rebuilding at the trained points reproduces the model bitwise") {
  const auto p = small_anisotropic(10);
  const ErcmModel m = ercm_greedy_train(p, opts_for(4));
  const ErcmModel r = ercm_with_points(p, m, m.points);
  CHECK(r.basis == m.basis);
  CHECK(r.b_matrix == m.b_matrix);
  CHECK(r.points == m.points);
  CHECK(r.point_dofs == m.point_dofs);
  CHECK(r.rhs_rows == m.rhs_rows);
  for (std::size_t q = 0; q < m.op_rows.size(); ++q)
    CHECK(r.op_rows[q] == m.op_rows[q]);

  const Parameter mu = Eigen::Vector2d(1.5, 1.0);
  CHECK(ercm_online_solve(r, p, mu).coeffs == ercm_online_solve(m, p, mu).coeffs);
}

TEST_CASE("rebuilding accepts arbitrary point sets and records degeneracy") {
  const auto p = small_anisotropic(10);
  const ErcmModel m = ercm_greedy_train(p, opts_for(4));

  Eigen::MatrixXd off(3, 2);
  off << 0.123, 0.456, -0.5, 0.25, 0.77, -0.33;
  const ErcmModel r = ercm_with_points(p, m, off);  // must not throw
  CHECK(r.size() == 3);
  CHECK((r.point_dofs.array() == -1).all());  // off-grid points
  CHECK(r.selected_mus == m.selected_mus.topRows(3));

  const ErcmModel g = ercm_with_points(p, m, m.points.topRows(2));
  CHECK((g.point_dofs.array() >= 0).all());

  const Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(3, 3);
  CHECK_THROWS_AS(ercm_with_points(p, m, bad), std::invalid_argument);
}

TEST_CASE("duplicated collocation points make the online system singular") {
  const auto p = small_anisotropic(10);
  const ErcmModel m = ercm_greedy_train(p, opts_for(3));
  Eigen::MatrixXd dup(2, 2);
  dup.row(0) = m.points.row(0);
  dup.row(1) = m.points.row(0);
  const ErcmModel r = ercm_with_points(p, m, dup);
  try {
    ercm_online_solve(r, p, Eigen::Vector2d(1.0, 0.5));
    FAIL("expected SingularSystemError");
  } catch (const SingularSystemError& e) {
    CHECK(std::string(e.what()).find('2') != std::string::npos);
  }
}

TEST_CASE("a parameter-independent problem degenerates the snapshot basis") {
  auto spec = diffusion_spec(8);
  spec.ops = {{"dxx", "1"}, {"dyy", "1"}};  // operator ignores mu entirely
  spec.rhs = {{"one", "1"}};
  spec.domain.train_counts = Eigen::Vector2i(3, 3);
  const auto p = build_problem(spec);
  // Negative tolerance forces an append even though the estimator is already
  // zero; the duplicate snapshot must be caught, not silently normalized.
  CHECK_THROWS_AS(ercm_greedy_train(p, opts_for(3, -1.0)), DegenerateBasisError);
}

TEST_CASE("training reports lattice exhaustion") {
  const auto p = small_anisotropic(10, 2, 2);
  CHECK_THROWS_AS(ercm_greedy_train(p, opts_for(6)), SolverError);
}

TEST_CASE("end-of-training reconditioning keeps points, parameters and span") {
  const auto p = small_anisotropic(10);
  const ErcmModel plain = ercm_greedy_train(p, opts_for(4));
  TrainOptions o = opts_for(4);
  o.ercm_end_mgs = true;
  const ErcmModel mgs = ercm_greedy_train(p, o);

  CHECK(mgs.selected_mus == plain.selected_mus);
  CHECK(mgs.points == plain.points);
  CHECK(mgs.point_dofs == plain.point_dofs);

  // Still unit lower triangular after re-triangularization.
  for (Index i = 0; i < 4; ++i) {
    CHECK(std::abs(mgs.b_matrix(i, i) - 1.0) <= 1e-10);
    for (Index j = i + 1; j < 4; ++j) CHECK(std::abs(mgs.b_matrix(i, j)) <= 1e-10);
  }

  // Same span, same collocation points: online solutions agree physically.
  for (const Parameter& mu :
       {Parameter(Eigen::Vector2d(1.7, 0.2)), Parameter(Eigen::Vector2d(0.4, 1.9))}) {
    const Eigen::VectorXd ua = plain.basis * ercm_online_solve(plain, p, mu).coeffs;
    const Eigen::VectorXd ub = mgs.basis * ercm_online_solve(mgs, p, mu).coeffs;
    CHECK((ua - ub).norm() <= 1e-9 * ua.norm());
  }

  for (Index i = 0; i < mgs.size(); ++i) {
    const Parameter mu = mgs.selected_mus.row(i);
    const Eigen::VectorXd truth = truth_solve(p, mu);
    CHECK((mgs.basis * ercm_online_solve(mgs, p, mu).coeffs - truth).norm() <=
          1e-8 * truth.norm());
  }
}

TEST_CASE("the per-point interface accepts pointwise-varying coefficients") {
  const auto p = small_anisotropic(10);
  const ErcmModel m = ercm_greedy_train(p, opts_for(4));
  const Parameter mu = Eigen::Vector2d(1.2, 0.9);
  const Eigen::VectorXd a_op = p.op_coeffs(mu), a_rhs = p.rhs_coeffs(mu);

  // Constant rows reproduce the affine wrapper exactly.
  const Eigen::MatrixXd rows_op = a_op.transpose().replicate(4, 1);
  const Eigen::MatrixXd rows_rhs = a_rhs.transpose().replicate(4, 1);
  const auto [mw, rw] = ercm_online_system(m, a_op, a_rhs, 4);
  const auto [mp, rp] = ercm_system_at_points(m, rows_op, rows_rhs, 4);
  CHECK(mp == mw);
  CHECK(rp == rw);

  // Pointwise-varying rows assemble row k from row k's coefficients alone.
  Eigen::MatrixXd vary = rows_op;
  vary.row(2) *= 3.0;
  const auto [mv, rv] = ercm_system_at_points(m, vary, rows_rhs, 4);
  CHECK(mv.row(0) == mw.row(0));
  CHECK((mv.row(2) - 3.0 * mw.row(2)).cwiseAbs().maxCoeff() <=
        1e-14 * mw.row(2).cwiseAbs().maxCoeff());
  CHECK(rv == rw);
}
