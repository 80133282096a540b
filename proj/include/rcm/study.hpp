// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef RCM_STUDY_HPP
#define RCM_STUDY_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "rcm/ercm.hpp"
#include "rcm/lsrcm.hpp"
#include "rcm/problem.hpp"

// The numerical studies behind the convergence and timing claims, plus the
// CSV writer the command-line tools share. Study results come back as plain
// rows so tests can assert on numbers and the tools can format them.

namespace rcm {

struct CsvTable {
  std::vector<std::string> comments;  // emitted as leading "# " lines
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

void write_csv(std::ostream& os, const CsvTable& t);
void write_csv_file(const std::string& path, const CsvTable& t);

// Truth accuracy under grid refinement: solve at each order, measure the
// interior-node error against the interpolated reference solution.
struct TruthConvergenceRow {
  Index nx = 0;
  double l2_error = 0, linf_error = 0;
};
std::vector<TruthConvergenceRow> study_truth_convergence(
    const ProblemSpec& base, const Eigen::VectorXd& mu,
    const std::vector<Index>& nx_list, Index ref_nx);

// Reduced-model accuracy as the basis grows: per size, the certified bound
// maxima over the training lattice and the test set, and the error spread
// over the test set.
struct RbmConvergenceRow {
  Index n = 0;
  double max_delta_train = 0, max_delta_test = 0;
  double max_l2 = 0, med_l2 = 0, min_l2 = 0;
  double max_linf = 0, med_linf = 0, min_linf = 0;
};
std::vector<RbmConvergenceRow> study_rbm_convergence(
    const AffineProblem& p, const LsModel& m, const Eigen::MatrixXd& test_mus);
std::vector<RbmConvergenceRow> study_rbm_convergence(
    const AffineProblem& p, const ErcmModel& m,
    const Eigen::MatrixXd& test_mus);

// What happens when the collocation points are not chosen greedily: the
// trained model is rebuilt over leading points of coarse tensor grids and
// its conditioning and best-case accuracy recorded per basis size.
// coarse_order 0 marks the greedy-trained control rows.
struct NaivePointsRow {
  Index n = 0;
  Index coarse_order = 0;
  double best_l2 = 0;    // smallest test error over solvable samples, NaN if none
  double max_rcond = 0;  // best conditioning seen over the test set
  Index singular_count = 0;
};
std::vector<NaivePointsRow> study_naive_points(
    const AffineProblem& p, const ErcmModel& trained,
    const std::vector<Index>& coarse_orders, const Eigen::MatrixXd& test_mus);

// Median per-solve times; online batches are sized so each measurement
// spans at least several milliseconds.
struct TimingResult {
  Index n = 0, dofs = 0;
  double offline_seconds = 0;  // training plus stability-table build
  double online_seconds = 0;   // per reduced solve
  double truth_seconds = 0;    // per full solve
  double online_per_truth = 0;
  double offline_per_truth = 0;
};
TimingResult study_timing(const AffineProblem& p, const LsModel& m, Index reps);
TimingResult study_timing(const AffineProblem& p, const ErcmModel& m,
                          Index reps);

}  // namespace rcm

#endif  // RCM_STUDY_HPP
