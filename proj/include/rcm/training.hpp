// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef RCM_TRAINING_HPP
#define RCM_TRAINING_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>

#include "rcm/problem.hpp"

// Shared types for the greedy offline stage and the reduced online solves.

namespace rcm {

struct TrainOptions {
  Index n_max = 1;
  double tol = 1e-8;        // stop once max Delta over the lattice drops below
  std::uint64_t seed = 0;   // first-parameter draw
  bool ercm_end_mgs = false;  // optional end-of-training reconditioning pass
};

struct TrainLogEntry {
  Index iteration = 0;  // 1-based
  Parameter mu;
  double max_delta = 0;  // sweep maximum that selected mu; NaN for iteration 1
};

using TrainCallback = std::function<void(const TrainLogEntry&)>;

struct OnlineSolution {
  Eigen::VectorXd coeffs;
  double rcond = 0;  // reciprocal condition estimate of the reduced matrix
};

inline Eigen::VectorXd reduced_solution(const Eigen::MatrixXd& basis,
                                        const Eigen::VectorXd& coeffs) {
  return basis.leftCols(coeffs.size()) * coeffs;
}

// Bounded draw by multiply-shift on the raw 64-bit stream; unlike
// std::uniform_int_distribution the result is identical across standard
// library implementations.
inline Index draw_index(std::mt19937_64& rng, Index n) {
  if (n <= 0) throw std::invalid_argument("draw_index: empty range");
  return static_cast<Index>((static_cast<unsigned __int128>(rng()) *
                             static_cast<unsigned __int128>(n)) >> 64);
}

// Uniform in [0, 1) from the top 53 bits.
inline double draw_unit(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1p-53;
}

// rows uniform samples inside the domain box, one parameter per row.
inline Eigen::MatrixXd sample_parameters(const ParameterDomain& dom, Index rows,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd s(rows, dom.dim());
  for (Index r = 0; r < rows; ++r)
    for (Index k = 0; k < dom.dim(); ++k)
      s(r, k) = dom.lo[k] + (dom.hi[k] - dom.lo[k]) * draw_unit(rng);
  return s;
}

}  // namespace rcm

#endif  // RCM_TRAINING_HPP
