// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef RCM_ARTIFACT_HPP
#define RCM_ARTIFACT_HPP

#include <map>
#include <string>

#include "rcm/ercm.hpp"
#include "rcm/lsrcm.hpp"
#include "rcm/problem.hpp"

// Model persistence. Binary container: magic "RCMMODEL", a version word, a
// JSON metadata block (strings and integers only), then named f64 arrays in
// little-endian column-major order. Every floating value a model carries
// lives in an array, never in the JSON, so round-trips are bit-exact and
// NaN markers survive. Writes go to a temporary file renamed into place.

namespace rcm {

struct LoadedModel {
  std::string method;  // "lsrcm" or "ercm"
  ProblemSpec problem_spec;
  std::map<std::string, std::string> config_echo;
  LsModel ls;      // populated when method == "lsrcm"
  ErcmModel ercm;  // populated when method == "ercm"
};

void save_model(const std::string& path, const ProblemSpec& spec,
                const LsModel& m,
                const std::map<std::string, std::string>& config_echo);
void save_model(const std::string& path, const ProblemSpec& spec,
                const ErcmModel& m,
                const std::map<std::string, std::string>& config_echo);

// Rejects bad magic, unknown versions, truncated files and missing fields
// with ArtifactError.
LoadedModel load_model(const std::string& path);

}  // namespace rcm

#endif  // RCM_ARTIFACT_HPP
