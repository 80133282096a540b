// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "rcm/config.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace rcm {

namespace {

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += fmt_g17(v[i]);
  }
  return s;
}

std::string join_indices(const std::vector<Index>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

std::string join_strings(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    s += v[i];
  }
  return s;
}

}  // namespace

std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::pair<Index, Index> parse_train_grid(const std::string& text) {
  const auto sep = text.find_first_of("xX");
  if (sep == std::string::npos || sep == 0 || sep + 1 >= text.size())
    throw std::invalid_argument("train grid must look like 32x32, got '" +
                                text + "'");
  std::size_t ax = 0, bx = 0;
  long a = 0, b = 0;
  try {
    a = std::stol(text.substr(0, sep), &ax);
    b = std::stol(text.substr(sep + 1), &bx);
  } catch (const std::exception&) {
    throw std::invalid_argument("train grid must look like 32x32, got '" +
                                text + "'");
  }
  if (ax != sep || bx != text.size() - sep - 1 || a < 1 || b < 1)
    throw std::invalid_argument("train grid must look like 32x32, got '" +
                                text + "'");
  return {static_cast<Index>(a), static_cast<Index>(b)};
}

std::vector<std::pair<std::string, std::string>> parse_term_list(
    const std::vector<std::string>& entries) {
  std::vector<std::pair<std::string, std::string>> terms;
  for (const std::string& e : entries) {
    const auto sep = e.find(':');
    if (sep == std::string::npos || sep == 0 || sep + 1 >= e.size())
      throw std::invalid_argument(
          "term descriptions must look like tag:expression, got '" + e + "'");
    terms.emplace_back(e.substr(0, sep), e.substr(sep + 1));
  }
  return terms;
}

void validate_config(const StudyConfig& c) {
  if (c.problem != "anisotropic" && c.problem != "diffusion" &&
      c.problem != "custom")
    throw std::invalid_argument("unknown problem '" + c.problem +
                                "' (anisotropic, diffusion or custom)");
  if (c.method != "lsrcm" && c.method != "ercm")
    throw std::invalid_argument("unknown method '" + c.method +
                                "' (lsrcm or ercm)");
  if (c.nx < 4) throw std::invalid_argument("nx must be at least 4");
  if (c.train_x < 1 || c.train_y < 1)
    throw std::invalid_argument("training lattice counts must be positive");
  if (c.nmax < 1) throw std::invalid_argument("nmax must be at least 1");
  if (!(c.tol >= 0) || !std::isfinite(c.tol))
    throw std::invalid_argument("tol must be a finite nonnegative number");
  if (c.samples < 1) throw std::invalid_argument("samples must be positive");
  if (c.ref_nx < 4) throw std::invalid_argument("ref-nx must be at least 4");
  if (c.reps < 1) throw std::invalid_argument("reps must be positive");
  if (c.problem == "custom") {
    if (c.domain_lo.empty() || c.domain_lo.size() != c.domain_hi.size())
      throw std::invalid_argument(
          "custom problems need matching domain-lo and domain-hi lists");
    if (c.domain_lo.size() != 2)
      throw std::invalid_argument(
          "the training lattice is two-dimensional, so custom parameter "
          "domains must have two components");
    for (std::size_t i = 0; i < c.domain_lo.size(); ++i)
      if (!(c.domain_lo[i] <= c.domain_hi[i]))
        throw std::invalid_argument(
            "custom domain bounds must satisfy lo <= hi componentwise");
    if (c.ops.empty() || c.rhs.empty())
      throw std::invalid_argument(
          "custom problems need at least one op and one rhs term");
  }
}

ProblemSpec make_problem_spec(const StudyConfig& c) {
  ProblemSpec spec;
  if (c.problem == "diffusion") {
    spec = diffusion_spec(c.nx);
  } else if (c.problem == "anisotropic") {
    spec = anisotropic_spec(c.nx);
  } else {
    spec.name = "custom";
    spec.nx = spec.ny = c.nx;
    const Index d = static_cast<Index>(c.domain_lo.size());
    spec.domain.lo = Eigen::Map<const Eigen::VectorXd>(c.domain_lo.data(), d);
    spec.domain.hi = Eigen::Map<const Eigen::VectorXd>(c.domain_hi.data(), d);
    spec.ops = parse_term_list(c.ops);
    spec.rhs = parse_term_list(c.rhs);
  }
  spec.domain.train_counts.resize(2);
  spec.domain.train_counts << static_cast<int>(c.train_x),
      static_cast<int>(c.train_y);
  return spec;
}

std::map<std::string, std::string> config_echo(const StudyConfig& c) {
  std::map<std::string, std::string> echo;
  echo["problem"] = c.problem;
  echo["method"] = c.method;
  echo["nx"] = std::to_string(c.nx);
  echo["train_x"] = std::to_string(c.train_x);
  echo["train_y"] = std::to_string(c.train_y);
  echo["nmax"] = std::to_string(c.nmax);
  echo["tol"] = fmt_g17(c.tol);
  echo["seed"] = std::to_string(c.seed);
  echo["test_seed"] = std::to_string(c.test_seed);
  echo["samples"] = std::to_string(c.samples);
  echo["ref_nx"] = std::to_string(c.ref_nx);
  echo["reps"] = std::to_string(c.reps);
  echo["ercm_end_mgs"] = c.ercm_end_mgs ? "1" : "0";
  if (!c.mu.empty()) echo["mu"] = join_doubles(c.mu);
  if (!c.nx_list.empty()) echo["nx_list"] = join_indices(c.nx_list);
  if (!c.coarse_orders.empty())
    echo["coarse_orders"] = join_indices(c.coarse_orders);
  if (c.problem == "custom") {
    echo["domain_lo"] = join_doubles(c.domain_lo);
    echo["domain_hi"] = join_doubles(c.domain_hi);
    echo["ops"] = join_strings(c.ops);
    echo["rhs"] = join_strings(c.rhs);
  }
  return echo;
}

}  // namespace rcm
