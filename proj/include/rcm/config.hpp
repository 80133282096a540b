// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef RCM_CONFIG_HPP
#define RCM_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rcm/problem.hpp"

// Run configuration shared by the command-line tools: defaults sized for a
// workstation run, every knob echoed back out as provenance.

namespace rcm {

// Shortest decimal that round-trips a double (printf %.17g).
std::string fmt_g17(double v);

struct StudyConfig {
  std::string problem = "anisotropic";  // anisotropic | diffusion | custom
  std::string method = "lsrcm";         // lsrcm | ercm
  Index nx = 40;                        // grid order (both directions)
  Index train_x = 32, train_y = 32;     // training lattice
  Index nmax = 17;
  double tol = 1e-8;
  std::uint64_t seed = 17;
  std::uint64_t test_seed = 10001;
  Index samples = 200;
  Index ref_nx = 80;
  Index reps = 5;
  Index n_active = -1;  // online truncation, -1 = full basis
  bool ercm_end_mgs = false;
  std::string model_path;
  std::string out_path;
  std::vector<double> mu;
  std::vector<Index> nx_list = {12, 16, 20, 24, 28, 32, 36, 40, 44, 48};
  std::vector<Index> coarse_orders = {6};
  // custom problem description: op/rhs entries are "tag:coefficient expr"
  std::vector<double> domain_lo, domain_hi;
  std::vector<std::string> ops, rhs;
};

// "AxB" (e.g. "128x64") -> lattice counts.
std::pair<Index, Index> parse_train_grid(const std::string& text);

// Splits "tag:expr" term descriptions at the first colon.
std::vector<std::pair<std::string, std::string>> parse_term_list(
    const std::vector<std::string>& entries);

// Range and consistency checks; throws std::invalid_argument with a
// single-line message.
void validate_config(const StudyConfig& c);

// Builds the configured problem description; built-in problems take their
// grid order and training lattice from the config.
ProblemSpec make_problem_spec(const StudyConfig& c);

// Deterministic key=value map echoed into artifacts and CSV headers.
std::map<std::string, std::string> config_echo(const StudyConfig& c);

}  // namespace rcm

#endif  // RCM_CONFIG_HPP
