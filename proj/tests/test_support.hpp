// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef RCM_TESTS_TEST_SUPPORT_HPP
#define RCM_TESTS_TEST_SUPPORT_HPP

#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

// Shared oracles and helpers. Oracles deliberately use different algorithms
// from the library so agreement is evidence, not tautology.

namespace testsupport {

// Chebyshev polynomial by three-term recurrence (the library uses the
// trigonometric form).
inline double oracle_chebyshev(long k, double x) {
  double tkm1 = 1.0, tk = x;
  if (k == 0) return tkm1;
  if (k == 1) return tk;
  for (long i = 2; i <= k; ++i) {
    const double next = 2 * x * tk - tkm1;
    tkm1 = tk;
    tk = next;
  }
  return tk;
}

struct LineFit {
  double slope = 0, intercept = 0, r2 = 0;
};

// Ordinary least squares of y against x with the coefficient of
// determination.
inline LineFit fit_line(const std::vector<double>& x,
                        const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line: need two or more points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LineFit f;
  const double denom = n * sxx - sx * sx;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double mean = sy / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double fit = f.intercept + f.slope * x[i];
    ss_res += (y[i] - fit) * (y[i] - fit);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

inline std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace testsupport

#endif  // RCM_TESTS_TEST_SUPPORT_HPP
