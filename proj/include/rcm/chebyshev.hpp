// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef RCM_CHEBYSHEV_HPP
#define RCM_CHEBYSHEV_HPP

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <utility>

// Chebyshev-Gauss-Lobatto grids, collocation differentiation matrices and
// tensor-product interpolants on [-1,1]^2. Everything is dense and
// scalar-generic; the solver layers instantiate double only.

namespace rcm {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// T_k(x) = cos(k acos x). Requires |x| <= 1.
template <typename Scalar>
Scalar chebyshev_value(Index k, Scalar x) {
  using std::acos;
  using std::cos;
  return cos(Scalar(k) * acos(x));
}

template <typename Scalar = double>
struct ChebGrid1D {
  Index order = 0;        // polynomial order n; order + 1 nodes
  VectorX<Scalar> nodes;  // x_j = cos(pi j / n), strictly decreasing
};

// Nodes x_j = cos(pi j / n). The lower half mirrors the upper half so that
// nodes[j] == -nodes[n-j] holds exactly (the midpoint of an even grid is 0).
template <typename Scalar = double>
ChebGrid1D<Scalar> cheb_nodes(Index order) {
  if (order < 1) throw std::invalid_argument("cheb_nodes: order must be >= 1");
  ChebGrid1D<Scalar> g;
  g.order = order;
  g.nodes.resize(order + 1);
  const Scalar pi = Scalar(EIGEN_PI);
  for (Index j = 0; 2 * j <= order; ++j) {
    g.nodes[j] = (2 * j == order) ? Scalar(0)
                                  : Scalar(std::cos(pi * Scalar(j) / Scalar(order)));
    g.nodes[order - j] = -g.nodes[j];
  }
  return g;
}

template <typename Scalar = double>
struct DiffOp1D {
  int deriv_order = 1;      // 1 or 2
  MatrixX<Scalar> matrix;   // (n+1) x (n+1) collocation derivative
};

// First-order matrix: off-diagonal (c_i/c_j) (-1)^{i+j} / (x_i - x_j) with
// c = 2 at the endpoints and 1 inside; diagonal via the negative row-sum
// trick. The second-order matrix is the square of the first.
template <typename Scalar = double>
DiffOp1D<Scalar> cheb_diff(const ChebGrid1D<Scalar>& g, int deriv_order) {
  if (deriv_order != 1 && deriv_order != 2)
    throw std::invalid_argument("cheb_diff: derivative order must be 1 or 2");
  const Index n = g.order;
  MatrixX<Scalar> d(n + 1, n + 1);
  for (Index i = 0; i <= n; ++i) {
    const Scalar ci = (i == 0 || i == n) ? Scalar(2) : Scalar(1);
    Scalar offdiag_sum = Scalar(0);
    for (Index j = 0; j <= n; ++j) {
      if (j == i) continue;
      const Scalar cj = (j == 0 || j == n) ? Scalar(2) : Scalar(1);
      const Scalar sign = ((i + j) % 2 == 0) ? Scalar(1) : Scalar(-1);
      d(i, j) = (ci / cj) * sign / (g.nodes[i] - g.nodes[j]);
      offdiag_sum += d(i, j);
    }
    d(i, i) = -offdiag_sum;
  }
  if (deriv_order == 2) d = (d * d).eval();
  return {deriv_order, std::move(d)};
}

// Tensor grid with homogeneous-Dirichlet interior numbering. Interior dofs
// are row-major in the (x index, y index) pair:
//   dof(ix, iy) = (ix - 1) (ny - 1) + (iy - 1),   1 <= ix < nx, 1 <= iy < ny.
template <typename Scalar = double>
struct TensorGrid2D {
  ChebGrid1D<Scalar> x, y;

  Index nx() const { return x.order; }
  Index ny() const { return y.order; }
  Index interior_size() const { return (nx() - 1) * (ny() - 1); }

  Index dof(Index ix, Index iy) const {
    if (ix < 1 || ix >= nx() || iy < 1 || iy >= ny())
      throw std::invalid_argument("TensorGrid2D::dof: boundary or out-of-range node");
    return (ix - 1) * (ny() - 1) + (iy - 1);
  }
  std::pair<Index, Index> node(Index dof) const {
    if (dof < 0 || dof >= interior_size())
      throw std::invalid_argument("TensorGrid2D::node: dof out of range");
    return {dof / (ny() - 1) + 1, dof % (ny() - 1) + 1};
  }
  Scalar dof_x(Index dof) const { return x.nodes[node(dof).first]; }
  Scalar dof_y(Index dof) const { return y.nodes[node(dof).second]; }
};

template <typename Scalar = double>
TensorGrid2D<Scalar> tensor_grid(Index nx, Index ny) {
  return {cheb_nodes<Scalar>(nx), cheb_nodes<Scalar>(ny)};
}

// Row k of the nodal-to-coefficient transform:
//   a_k = 2 / (n c_k) sum_j w(x_j) cos(pi j k / n) / c_j.
template <typename Scalar = double>
MatrixX<Scalar> cheb_transform_matrix(Index order) {
  if (order < 1)
    throw std::invalid_argument("cheb_transform_matrix: order must be >= 1");
  const Index n = order;
  MatrixX<Scalar> c(n + 1, n + 1);
  const Scalar pi = Scalar(EIGEN_PI);
  for (Index k = 0; k <= n; ++k) {
    const Scalar ck = (k == 0 || k == n) ? Scalar(2) : Scalar(1);
    for (Index j = 0; j <= n; ++j) {
      const Scalar cj = (j == 0 || j == n) ? Scalar(2) : Scalar(1);
      c(k, j) = Scalar(2) / (Scalar(n) * ck * cj) *
                Scalar(std::cos(pi * Scalar(j) * Scalar(k) / Scalar(n)));
    }
  }
  return c;
}

template <typename Scalar = double>
struct SpectralInterpolant {
  Index nx = 0, ny = 0;
  MatrixX<Scalar> coeffs;  // (nx+1) x (ny+1) in the T_{k1}(x) T_{k2}(y) basis
};

// values(j, m) = w(x_j, y_m) on the full tensor grid, boundary included.
// Dimension-by-dimension transform; cost O(nx ny (nx + ny)).
template <typename Scalar>
SpectralInterpolant<Scalar> cheb_coeffs_2d(const TensorGrid2D<Scalar>& g,
                                           const MatrixX<Scalar>& values) {
  if (values.rows() != g.nx() + 1 || values.cols() != g.ny() + 1)
    throw std::invalid_argument("cheb_coeffs_2d: values shape does not match grid");
  SpectralInterpolant<Scalar> s;
  s.nx = g.nx();
  s.ny = g.ny();
  s.coeffs = cheb_transform_matrix<Scalar>(g.nx()) * values *
             cheb_transform_matrix<Scalar>(g.ny()).transpose();
  return s;
}

// w(x, y) = sum_k a_{k1 k2} T_{k1}(x) T_{k2}(y); O(nx ny) per point.
template <typename Scalar>
Scalar interpolate_at(const SpectralInterpolant<Scalar>& s, Scalar px, Scalar py) {
  if (!(px >= Scalar(-1) && px <= Scalar(1) && py >= Scalar(-1) && py <= Scalar(1)))
    throw std::domain_error("interpolate_at: point outside [-1,1]^2");
  VectorX<Scalar> tx(s.nx + 1), ty(s.ny + 1);
  for (Index k = 0; k <= s.nx; ++k) tx[k] = chebyshev_value(k, px);
  for (Index k = 0; k <= s.ny; ++k) ty[k] = chebyshev_value(k, py);
  return tx.dot(s.coeffs * ty);
}

// points is p x 2 (x, y per row).
template <typename Scalar>
VectorX<Scalar> interpolate_at(const SpectralInterpolant<Scalar>& s,
                               const MatrixX<Scalar>& points) {
  if (points.cols() != 2)
    throw std::invalid_argument("interpolate_at: points must be p x 2");
  VectorX<Scalar> out(points.rows());
  for (Index p = 0; p < points.rows(); ++p)
    out[p] = interpolate_at(s, points(p, 0), points(p, 1));
  return out;
}

// Zero-extends an interior-dof vector to the full grid (homogeneous
// Dirichlet boundary data).
template <typename Scalar>
MatrixX<Scalar> interior_to_full(const TensorGrid2D<Scalar>& g,
                                 const VectorX<Scalar>& v) {
  if (v.size() != g.interior_size())
    throw std::invalid_argument("interior_to_full: interior size mismatch");
  MatrixX<Scalar> full = MatrixX<Scalar>::Zero(g.nx() + 1, g.ny() + 1);
  for (Index ix = 1; ix < g.nx(); ++ix)
    for (Index iy = 1; iy < g.ny(); ++iy) full(ix, iy) = v[g.dof(ix, iy)];
  return full;
}

template <typename Scalar, typename F>
MatrixX<Scalar> sample_full(const TensorGrid2D<Scalar>& g, F&& f) {
  MatrixX<Scalar> vals(g.nx() + 1, g.ny() + 1);
  for (Index ix = 0; ix <= g.nx(); ++ix)
    for (Index iy = 0; iy <= g.ny(); ++iy)
      vals(ix, iy) = f(g.x.nodes[ix], g.y.nodes[iy]);
  return vals;
}

template <typename Scalar, typename F>
VectorX<Scalar> sample_interior(const TensorGrid2D<Scalar>& g, F&& f) {
  VectorX<Scalar> vals(g.interior_size());
  for (Index ix = 1; ix < g.nx(); ++ix)
    for (Index iy = 1; iy < g.ny(); ++iy)
      vals[g.dof(ix, iy)] = f(g.x.nodes[ix], g.y.nodes[iy]);
  return vals;
}

}  // namespace rcm

#endif  // RCM_CHEBYSHEV_HPP
