// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <stdexcept>

#include "rcm/mu_expression.hpp"
#include "rcm/problem.hpp"
#include "rcm/stability.hpp"
#include "rcm/training.hpp"
#include "test_support.hpp"

using namespace rcm;

namespace {

// Direct dense assembly that bypasses the affine term machinery: explicit
// Kronecker loops over interior dof pairs from the raw differentiation
// matrices, with the physical coefficient applied row-wise.
Eigen::MatrixXd oracle_operator(const AffineProblem& p, const Parameter& mu) {
  const auto& g = p.grid();
  const Index m = g.nx() - 1, n = g.ny() - 1;
  const Eigen::MatrixXd d2x = cheb_diff(g.x, 2).matrix.block(1, 1, m, m);
  const Eigen::MatrixXd d2y = cheb_diff(g.y, 2).matrix.block(1, 1, n, n);
  Eigen::MatrixXd kx = Eigen::MatrixXd::Zero(m * n, m * n);
  Eigen::MatrixXd ky = Eigen::MatrixXd::Zero(m * n, m * n);
  for (Index ix = 0; ix < m; ++ix)
    for (Index iy = 0; iy < n; ++iy)
      for (Index kxi = 0; kxi < m; ++kxi)
        for (Index kyi = 0; kyi < n; ++kyi) {
          if (iy == kyi) kx(ix * n + iy, kxi * n + kyi) = d2x(ix, kxi);
          if (ix == kxi) ky(ix * n + iy, kxi * n + kyi) = d2y(iy, kyi);
        }
  Eigen::MatrixXd l(m * n, m * n);
  if (p.name() == "diffusion") {
    Eigen::VectorXd cx(m * n), cy(m * n);
    for (Index d = 0; d < m * n; ++d) {
      cx[d] = 1.0 + mu[0] * g.dof_x(d);
      cy[d] = 1.0 + mu[1] * g.dof_y(d);
    }
    l = cx.asDiagonal() * kx + cy.asDiagonal() * ky;
  } else {
    l = -kx - mu[0] * ky;
    l.diagonal().array() -= mu[1];
  }
  return l;
}

}  // namespace

TEST_CASE("built-in problems expose the expected shape") {
  const auto d = build_diffusion(12);
  CHECK(d.name() == "diffusion");
  CHECK(d.qa() == 4);
  CHECK(d.qf() == 1);
  CHECK(d.dofs() == 121);
  CHECK(d.domain().lo == Eigen::Vector2d(-0.99, -0.99));
  CHECK(d.domain().hi == Eigen::Vector2d(0.99, 0.99));
  CHECK(d.domain().train_counts == Eigen::Vector2i(64, 64));

  const auto a = build_anisotropic(12);
  CHECK(a.name() == "anisotropic");
  CHECK(a.qa() == 3);
  CHECK(a.qf() == 1);
  CHECK(a.domain().lo == Eigen::Vector2d(0.1, 0.0));
  CHECK(a.domain().hi == Eigen::Vector2d(4.0, 2.0));
  CHECK(a.domain().train_counts == Eigen::Vector2i(128, 64));
}

TEST_CASE("affine coefficients take pinned values") {
  const auto d = build_diffusion(8);
  CHECK(d.op_coeffs(Eigen::Vector2d(0, 0)) == Eigen::Vector4d(1, 0, 1, 0));
  CHECK(d.op_coeffs(Eigen::Vector2d(0.5, -0.5)) == Eigen::Vector4d(1, 0.5, 1, -0.5));
  CHECK(d.rhs_coeffs(Eigen::Vector2d(0.7, 0.1)) == Eigen::VectorXd::Ones(1));

  const auto a = build_anisotropic(8);
  CHECK(a.op_coeffs(Eigen::Vector2d(1, 0.5)) == Eigen::Vector3d(1, 1, 0.5));
  CHECK(a.op_coeffs(Eigen::Vector2d(0.1, 2)) == Eigen::Vector3d(1, 0.1, 2));
  CHECK(a.rhs_coeffs(Eigen::Vector2d(3, 1)) == Eigen::VectorXd::Ones(1));
}

TEST_CASE("forcing terms do not depend on the parameter") {
  const auto diff = build_diffusion(8);
  const auto aniso = build_anisotropic(8);
  for (const auto* p : {&diff, &aniso}) {
    const Eigen::VectorXd f1 = p->rhs_at(p->domain().lo);
    const Eigen::VectorXd f2 = p->rhs_at(p->domain().hi);
    CHECK(f1 == f2);
  }
}

TEST_CASE("forcing samples match the closed forms") {
  CHECK(forcing_value("one", 0.3, -0.7) == 1.0);
  CHECK(forcing_value("zero", 0.3, -0.7) == 0.0);
  CHECK(forcing_value("exp(4*x*y)", 0.0, 0.9) == 1.0);
  CHECK(forcing_value("exp(4*x*y)", 0.5, -0.5) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(forcing_value("-10*sin(8*x*(y-1))", 0.5, 1.0) == 0.0);
  CHECK(forcing_value("-10*sin(8*x*(y-1))", 0.25, 0.0) ==
        doctest::Approx(-10 * std::sin(-2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(forcing_value("cos(x)", 0, 0), std::invalid_argument);

  const auto d = build_diffusion(12);
  const Index center = d.grid().dof(6, 6);  // x = y = 0 on an even grid
  CHECK(d.rhs_vector(0)[center] == 1.0);
  const Index other = d.grid().dof(3, 9);
  CHECK(d.rhs_vector(0)[other] ==
        forcing_value("exp(4*x*y)", d.grid().dof_x(other), d.grid().dof_y(other)));
}

TEST_CASE("affine assembly reproduces a direct dense construction") {
  const auto diff = build_diffusion(8);
  const auto aniso = build_anisotropic(8);
  for (const auto* p : {&diff, &aniso}) {
    const Eigen::MatrixXd samples = sample_parameters(p->domain(), 50, 42);
    for (Index r = 0; r < samples.rows(); ++r) {
      const Parameter mu = samples.row(r);
      const Eigen::MatrixXd lib = p->operator_at(mu);
      const Eigen::MatrixXd dir = oracle_operator(*p, mu);
      CHECK((lib - dir).cwiseAbs().maxCoeff() <=
            1e-12 * dir.cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("term matrices, matrix-free application and the sum agree") {
  std::mt19937_64 rng(7);
  const auto diff = build_diffusion(8);
  const auto aniso = build_anisotropic(8);
  for (const auto* p : {&diff, &aniso}) {
    Eigen::VectorXd u(p->dofs());
    for (Index i = 0; i < u.size(); ++i) u[i] = 2 * draw_unit(rng) - 1;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(p->dofs(), p->dofs());
    const Parameter mu = 0.5 * (p->domain().lo + p->domain().hi);
    const Eigen::VectorXd a = p->op_coeffs(mu);
    for (Index q = 0; q < p->qa(); ++q) {
      const Eigen::MatrixXd tm = p->term_matrix(q);
      const Eigen::VectorXd direct = tm * u;
      const Eigen::VectorXd lazy = p->apply_term(q, u);
      CHECK((direct - lazy).norm() <= 1e-12 * (direct.norm() + 1));
      sum += a[q] * tm;
    }
    CHECK((sum - p->operator_at(mu)).cwiseAbs().maxCoeff() <=
          1e-12 * sum.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("zero forcing yields the exactly zero solution") {
  auto spec = diffusion_spec(8);
  spec.rhs = {{"zero", "1"}};
  const auto p = build_problem(spec);
  const Eigen::VectorXd u = truth_solve(p, Eigen::Vector2d(0.3, 0.3));
  CHECK(u.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("truth solutions meet the residual acceptance independently") {
  const auto d = build_diffusion(16);
  const Parameter mu_d = Eigen::Vector2d(0.3, -0.2);
  const Eigen::VectorXd ud = truth_solve(d, mu_d);
  const Eigen::VectorXd fd = d.rhs_at(mu_d);
  CHECK((fd - d.operator_at(mu_d) * ud).norm() <= 1e-9 * fd.norm());

  const auto a = build_anisotropic(16);
  const Parameter mu_a = Eigen::Vector2d(1.0, 0.5);
  const Eigen::VectorXd ua = truth_solve(a, mu_a);
  const Eigen::VectorXd fa = a.rhs_at(mu_a);
  CHECK((fa - a.operator_at(mu_a) * ua).norm() <= 1e-9 * fa.norm());
}

TEST_CASE("smallest squared singular value on closed-form fixtures") {
  CHECK(smallest_squared_singular_value(Eigen::MatrixXd::Identity(12, 12)) ==
        doctest::Approx(1.0).epsilon(1e-10));

  Eigen::VectorXd diag(5);
  diag << 3, 2, 0.5, 1.7, 0.9;
  const Eigen::MatrixXd dm = diag.asDiagonal();
  CHECK(smallest_squared_singular_value(dm) == doctest::Approx(0.25).epsilon(1e-10));

  std::mt19937_64 rng(11);
  Eigen::MatrixXd l(20, 20);
  for (Index i = 0; i < 20; ++i)
    for (Index j = 0; j < 20; ++j) l(i, j) = 2 * draw_unit(rng) - 1;
  l.diagonal().array() += 4;  // keep it comfortably nonsingular
  const double b1 = smallest_squared_singular_value(l);
  const double b9 = smallest_squared_singular_value((3 * l).eval());
  CHECK(b9 == doctest::Approx(9 * b1).epsilon(1e-8));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l.transpose() * l);
  CHECK(b1 == doctest::Approx(es.eigenvalues().minCoeff()).epsilon(1e-8));

  Eigen::MatrixXd singular = l;
  singular.col(3).setZero();
  CHECK(std::abs(smallest_squared_singular_value(singular)) < 1e-10);
}

TEST_CASE("stability constant agrees with a dense eigensolver") {
  const auto d = build_diffusion(10);
  const Parameter mu_d = Eigen::Vector2d(0.5, -0.3);
  Eigen::MatrixXd ld = d.operator_at(mu_d);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esd(ld.transpose() * ld);
  CHECK(stability_constant(d, mu_d) ==
        doctest::Approx(esd.eigenvalues().minCoeff()).epsilon(1e-8));

  const auto a = build_anisotropic(10);
  const Parameter mu_a = Eigen::Vector2d(2.0, 1.0);
  Eigen::MatrixXd la = a.operator_at(mu_a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esa(la.transpose() * la);
  CHECK(stability_constant(a, mu_a) ==
        doctest::Approx(esa.eigenvalues().minCoeff()).epsilon(1e-8));
}

TEST_CASE("stability tables tabulate, look up exactly and dip at corners") {
  const auto p = build_diffusion(8);
  Eigen::MatrixXd pts(3, 2);
  pts << 0, 0, 0.99, 0.99, -0.99, 0.99;
  const StabilityTable table = stability_table(p, pts);
  REQUIRE(table.values.size() == 3);
  CHECK((table.values.array() > 0).all());
  CHECK(table.min_value() == table.values.minCoeff());
  CHECK(table.points == pts);
  CHECK(table.build_seconds >= 0);
  CHECK(table.find_row(Eigen::Vector2d(0.99, 0.99)) == 1);
  CHECK(table.find_row(Eigen::Vector2d(0.123, 0)) == -1);
  // Degenerating diffusion coefficient weakens coercivity at the corner.
  CHECK(table.values[1] < table.values[0]);
}

TEST_CASE("beta cache returns preloaded values without recomputation") {
  const auto p = build_diffusion(8);
  BetaCache cache(p);
  StabilityTable fake;
  fake.points = Eigen::MatrixXd(1, 2);
  fake.points << 0.25, 0.25;
  fake.values = Eigen::VectorXd::Constant(1, 123.0);
  cache.preload(fake);
  CHECK(cache.at(Eigen::Vector2d(0.25, 0.25)) == 123.0);  // memo, not recompute
  const Parameter fresh = Eigen::Vector2d(0.5, 0.5);
  CHECK(cache.at(fresh) == doctest::Approx(stability_constant(p, fresh)).epsilon(1e-12));
  CHECK(cache.size() == 2);
}

TEST_CASE("parameter domains: containment is inclusive, lattices are exact") {
  ParameterDomain dom;
  dom.lo = Eigen::Vector2d(0, 10);
  dom.hi = Eigen::Vector2d(1, 11);
  dom.train_counts = Eigen::Vector2i(3, 2);
  CHECK(dom.contains(Eigen::Vector2d(0, 10)));
  CHECK(dom.contains(Eigen::Vector2d(1, 11)));
  CHECK(dom.contains(Eigen::Vector2d(0.5, 10.5)));
  CHECK(!dom.contains(Eigen::Vector2d(-0.001, 10.5)));
  CHECK(!dom.contains(Eigen::Vector2d(0.5, 11.001)));
  CHECK(!dom.contains(Eigen::VectorXd::Zero(3)));

  const Eigen::MatrixXd pts = dom.train_points();
  REQUIRE(pts.rows() == 6);
  Eigen::MatrixXd expect(6, 2);
  expect << 0, 10, 0, 11, 0.5, 10, 0.5, 11, 1, 10, 1, 11;
  CHECK(pts == expect);

  dom.train_counts = Eigen::Vector2i(1, 2);
  const Eigen::MatrixXd collapsed = dom.train_points();
  REQUIRE(collapsed.rows() == 2);
  CHECK(collapsed(0, 0) == 0.5);  // 1-count component sits at the midpoint
  CHECK(collapsed(1, 0) == 0.5);

  dom.train_counts = Eigen::Vector2i(0, 2);
  CHECK_THROWS_AS(dom.train_points(), std::invalid_argument);
}

TEST_CASE("coefficient expressions parse, evaluate and reject garbage") {
  const Eigen::VectorXd mu23 = Eigen::Vector2d(2, 3);
  CHECK(MuExpression::parse("1 + mu1*mu2")(mu23) == 7.0);
  CHECK(MuExpression::parse("2*(mu2 - 1)")(mu23) == 4.0);
  CHECK(MuExpression::parse("-mu1/2 + 0.5")(mu23) == -0.5);
  CHECK(MuExpression::parse(" ( mu1 ) ")(mu23) == 2.0);
  CHECK(MuExpression::parse("-2*-3")(mu23) == 6.0);
  CHECK(MuExpression::parse("1/mu1")(mu23) == 0.5);
  CHECK(MuExpression::parse("1+2*3")(mu23) == 7.0);
  CHECK(MuExpression::parse("(1+2)*3")(mu23) == 9.0);

  CHECK(MuExpression::parse("3.5").max_mu_index() == 0);
  CHECK(MuExpression::parse("mu2").max_mu_index() == 2);
  CHECK(MuExpression::parse("mu1 + mu7*0").max_mu_index() == 7);

  CHECK_THROWS_AS(MuExpression::parse(""), std::invalid_argument);
  CHECK_THROWS_AS(MuExpression::parse("1 +"), std::invalid_argument);
  CHECK_THROWS_AS(MuExpression::parse("foo"), std::invalid_argument);
  CHECK_THROWS_AS(MuExpression::parse("mu0"), std::invalid_argument);
  CHECK_THROWS_AS(MuExpression::parse("(1"), std::invalid_argument);
  CHECK_THROWS_AS(MuExpression::parse("mu1 mu2"), std::invalid_argument);
  CHECK_THROWS_AS(MuExpression::parse("mu3")(mu23), std::invalid_argument);
}

TEST_CASE("problem construction rejects malformed descriptions") {
  auto spec = diffusion_spec(8);
  spec.nx = 3;
  CHECK_THROWS_AS(build_problem(spec), std::invalid_argument);

  spec = diffusion_spec(8);
  spec.ops.clear();
  CHECK_THROWS_AS(build_problem(spec), std::invalid_argument);

  spec = diffusion_spec(8);
  spec.ops[0] = {"dzz", "1"};
  CHECK_THROWS_AS(build_problem(spec), std::invalid_argument);

  spec = diffusion_spec(8);
  spec.ops[0] = {"dxx", "mu3"};  // beyond the 2-parameter domain
  CHECK_THROWS_AS(build_problem(spec), std::invalid_argument);

  spec = diffusion_spec(8);
  spec.rhs = {{"unknown-forcing", "1"}};
  CHECK_THROWS_AS(build_problem(spec), std::invalid_argument);
}
