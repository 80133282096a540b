// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "rcm/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "rcm/artifact.hpp"
#include "rcm/config.hpp"
#include "rcm/ercm.hpp"
#include "rcm/errors.hpp"
#include "rcm/lsrcm.hpp"
#include "rcm/problem.hpp"
#include "rcm/stability.hpp"
#include "rcm/study.hpp"
#include "rcm/training.hpp"

namespace rcm {

namespace {

struct CliState {
  StudyConfig cfg;
  std::string train_grid;
  std::string config_path;
};

// CLI11 processes configuration files only on the root application, so the
// subcommands apply theirs by hand: each key=value line fills the matching
// option unless the command line already set it.
void apply_config_file(CLI::App* cmd, const std::string& path) {
  if (path.empty()) return;
  std::ifstream is(path);
  if (!is)
    throw std::invalid_argument("cannot open configuration file '" + path + "'");
  const auto trim = [](const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto where = path + ":" + std::to_string(lineno);
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(where + ": expected key=value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty() || key == "config")
      throw std::invalid_argument(where + ": bad configuration key");
    CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (!opt)
      throw std::invalid_argument(where + ": unknown configuration key '" + key +
                                  "'");
    if (opt->count() > 0) continue;  // command line wins
    opt->add_result(value);
    opt->run_callback();
  }
}

std::string mu_text(const Eigen::VectorXd& mu) {
  std::string s = "(";
  for (Index i = 0; i < mu.size(); ++i) {
    if (i) s += ", ";
    s += fmt_g17(mu[i]);
  }
  return s + ")";
}

std::string domain_text(const ParameterDomain& d) {
  std::string s;
  for (Index i = 0; i < d.dim(); ++i) {
    if (i) s += " x ";
    s += "[" + fmt_g17(d.lo[i]) + ", " + fmt_g17(d.hi[i]) + "]";
  }
  return s;
}

void add_problem_options(CLI::App* cmd, CliState& st) {
  cmd->add_option("--problem", st.cfg.problem,
                  "problem name: anisotropic, diffusion or custom")
      ->capture_default_str();
  cmd->add_option("--nx", st.cfg.nx, "Chebyshev grid order, both directions")
      ->capture_default_str();
  cmd->add_option("--train-grid", st.train_grid,
                  "training lattice, e.g. 32x32");
  cmd->add_option("--domain-lo", st.cfg.domain_lo,
                  "custom problem: domain lower bounds")
      ->delimiter(',');
  cmd->add_option("--domain-hi", st.cfg.domain_hi,
                  "custom problem: domain upper bounds")
      ->delimiter(',');
  cmd->add_option("--op", st.cfg.ops,
                  "custom problem: operator term tag:expr (repeatable)");
  cmd->add_option("--rhs-term", st.cfg.rhs,
                  "custom problem: forcing term tag:expr (repeatable)");
}

void finalize(CliState& st) {
  if (!st.train_grid.empty()) {
    const auto [a, b] = parse_train_grid(st.train_grid);
    st.cfg.train_x = a;
    st.cfg.train_y = b;
  }
  validate_config(st.cfg);
}

std::vector<std::string> echo_comments(const std::string& title,
                                       const StudyConfig& cfg) {
  std::vector<std::string> lines = {title, "format_version=1"};
  for (const auto& [k, v] : config_echo(cfg)) lines.push_back(k + "=" + v);
  return lines;
}

void emit(const CsvTable& t, const std::string& out_path) {
  if (out_path.empty()) {
    write_csv(std::cout, t);
  } else {
    write_csv_file(out_path, t);
    std::cout << "wrote " << t.rows.size() << " rows to " << out_path << "\n";
  }
}

Eigen::VectorXd mu_from_config(const StudyConfig& cfg, Index dim) {
  if (cfg.mu.empty())
    throw std::invalid_argument("this command needs --mu with " +
                                std::to_string(dim) + " components");
  if (static_cast<Index>(cfg.mu.size()) != dim)
    throw std::invalid_argument("--mu must have " + std::to_string(dim) +
                                " components");
  return Eigen::Map<const Eigen::VectorXd>(cfg.mu.data(),
                                           static_cast<Index>(cfg.mu.size()));
}

void run_offline(CliState& st) {
  finalize(st);
  const StudyConfig& cfg = st.cfg;
  if (cfg.model_path.empty())
    throw std::invalid_argument("offline needs --model <output path>");
  const ProblemSpec spec = make_problem_spec(cfg);
  const AffineProblem p = build_problem(spec);
  TrainOptions opts;
  opts.n_max = cfg.nmax;
  opts.tol = cfg.tol;
  opts.seed = cfg.seed;
  opts.ercm_end_mgs = cfg.ercm_end_mgs;
  const TrainCallback cb = [](const TrainLogEntry& e) {
    std::cout << "iteration " << e.iteration << ": mu = " << mu_text(e.mu)
              << ", max bound = "
              << (std::isnan(e.max_delta) ? std::string("-")
                                          : fmt_g17(e.max_delta))
              << "\n";
  };
  Index n = 0;
  double terminal = 0, train_s = 0, table_s = 0;
  if (cfg.method == "lsrcm") {
    const LsModel m = ls_greedy_train(p, opts, nullptr, cb);
    n = m.size();
    terminal = m.terminal_max_delta;
    train_s = m.train_seconds;
    table_s = m.stability.build_seconds;
    save_model(cfg.model_path, spec, m, config_echo(cfg));
  } else {
    const ErcmModel m = ercm_greedy_train(p, opts, nullptr, cb);
    n = m.size();
    terminal = m.terminal_max_delta;
    train_s = m.train_seconds;
    table_s = m.stability.build_seconds;
    save_model(cfg.model_path, spec, m, config_echo(cfg));
  }
  std::cout << "trained " << cfg.method << " model: basis size " << n
            << ", terminal max bound " << fmt_g17(terminal) << "\n"
            << "stability table " << fmt_g17(table_s) << " s, training "
            << fmt_g17(train_s) << " s\n"
            << "saved " << cfg.model_path << "\n";
}

void run_online(CliState& st) {
  const StudyConfig& cfg = st.cfg;
  if (cfg.model_path.empty())
    throw std::invalid_argument("online needs --model <artifact path>");
  const LoadedModel lm = load_model(cfg.model_path);
  const AffineProblem p = build_problem(lm.problem_spec);
  const Eigen::VectorXd mu = mu_from_config(cfg, p.domain().dim());
  if (!p.domain().contains(mu))
    throw std::domain_error("mu=" + mu_text(mu) +
                            " is outside the certified parameter domain " +
                            domain_text(p.domain()));
  const Index size = lm.method == "lsrcm" ? lm.ls.size() : lm.ercm.size();
  Index n = cfg.n_active < 0 ? size : cfg.n_active;
  if (n < 1 || n > size)
    throw std::invalid_argument("--n must be between 1 and " +
                                std::to_string(size));

  const auto t0 = std::chrono::steady_clock::now();
  OnlineSolution sol;
  if (lm.method == "lsrcm")
    sol = ls_online_solve(lm.ls, p, mu, n);
  else
    sol = ercm_online_solve(lm.ercm, p, mu, n);
  const double solve_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  const EstimatorCache& cache = lm.method == "lsrcm" ? lm.ls.cache : lm.ercm.cache;
  const Eigen::MatrixXd& basis = lm.method == "lsrcm" ? lm.ls.basis : lm.ercm.basis;
  const double residual = residual_norm_decomposed(
      cache, p.op_coeffs(mu), p.rhs_coeffs(mu), sol.coeffs);
  const double beta = stability_constant(p, mu);
  const double delta = error_bound(residual, beta);
  const Eigen::VectorXd u = basis.leftCols(n) * sol.coeffs;

  CsvTable t;
  t.comments = {"rcm online evaluation",
                "format_version=1",
                "model=" + cfg.model_path,
                "method=" + lm.method,
                "mu=" + mu_text(mu),
                "n=" + std::to_string(n),
                "residual=" + fmt_g17(residual),
                "beta=" + fmt_g17(beta),
                "delta=" + fmt_g17(delta),
                "rcond=" + fmt_g17(sol.rcond),
                "solve_seconds=" + fmt_g17(solve_seconds)};
  t.columns = {"x", "y", "u"};
  for (Index k = 0; k < u.size(); ++k)
    t.rows.push_back({fmt_g17(p.grid().dof_x(k)), fmt_g17(p.grid().dof_y(k)),
                      fmt_g17(u[k])});
  emit(t, cfg.out_path);
  if (!cfg.out_path.empty())
    std::cout << "certified bound " << fmt_g17(delta) << ", residual "
              << fmt_g17(residual) << ", solve " << fmt_g17(solve_seconds)
              << " s\n";
}

void run_study_truth(CliState& st) {
  finalize(st);
  const StudyConfig& cfg = st.cfg;
  const ProblemSpec spec = make_problem_spec(cfg);
  const Eigen::VectorXd mu = mu_from_config(cfg, spec.domain.dim());
  const auto rows =
      study_truth_convergence(spec, mu, cfg.nx_list, cfg.ref_nx);
  CsvTable t;
  t.comments = echo_comments("rcm truth convergence study", cfg);
  t.columns = {"nx", "l2_error", "linf_error"};
  for (const auto& r : rows)
    t.rows.push_back({std::to_string(r.nx), fmt_g17(r.l2_error),
                      fmt_g17(r.linf_error)});
  emit(t, cfg.out_path);
}

void run_study_rbm(CliState& st) {
  const StudyConfig& cfg = st.cfg;
  if (cfg.model_path.empty())
    throw std::invalid_argument("study rbm needs --model <artifact path>");
  const LoadedModel lm = load_model(cfg.model_path);
  const AffineProblem p = build_problem(lm.problem_spec);
  const Eigen::MatrixXd test_mus =
      sample_parameters(p.domain(), cfg.samples, cfg.test_seed);
  const auto rows = lm.method == "lsrcm"
                        ? study_rbm_convergence(p, lm.ls, test_mus)
                        : study_rbm_convergence(p, lm.ercm, test_mus);
  CsvTable t;
  t.comments = {"rcm reduced-convergence study", "format_version=1",
                "model=" + cfg.model_path, "method=" + lm.method,
                "samples=" + std::to_string(cfg.samples),
                "test_seed=" + std::to_string(cfg.test_seed)};
  t.columns = {"n",      "max_delta_train", "max_delta_test",
               "max_l2", "med_l2",          "min_l2",
               "max_linf", "med_linf",      "min_linf"};
  for (const auto& r : rows)
    t.rows.push_back({std::to_string(r.n), fmt_g17(r.max_delta_train),
                      fmt_g17(r.max_delta_test), fmt_g17(r.max_l2),
                      fmt_g17(r.med_l2), fmt_g17(r.min_l2),
                      fmt_g17(r.max_linf), fmt_g17(r.med_linf),
                      fmt_g17(r.min_linf)});
  emit(t, cfg.out_path);
}

void run_study_naive(CliState& st) {
  const StudyConfig& cfg = st.cfg;
  if (cfg.model_path.empty())
    throw std::invalid_argument(
        "study naive-points needs --model <artifact path>");
  const LoadedModel lm = load_model(cfg.model_path);
  if (lm.method != "ercm")
    throw std::invalid_argument(
        "study naive-points needs an ercm model artifact");
  const AffineProblem p = build_problem(lm.problem_spec);
  const Eigen::MatrixXd test_mus =
      sample_parameters(p.domain(), cfg.samples, cfg.test_seed);
  const auto rows =
      study_naive_points(p, lm.ercm, cfg.coarse_orders, test_mus);
  CsvTable t;
  t.comments = {"rcm collocation-point study", "format_version=1",
                "coarse_order=0 marks the greedy-trained control",
                "model=" + cfg.model_path,
                "samples=" + std::to_string(cfg.samples),
                "test_seed=" + std::to_string(cfg.test_seed)};
  t.columns = {"n", "coarse_order", "best_l2", "max_rcond", "singular_count"};
  for (const auto& r : rows)
    t.rows.push_back({std::to_string(r.n), std::to_string(r.coarse_order),
                      fmt_g17(r.best_l2), fmt_g17(r.max_rcond),
                      std::to_string(r.singular_count)});
  emit(t, cfg.out_path);
}

void run_study_timing(CliState& st) {
  const StudyConfig& cfg = st.cfg;
  if (cfg.model_path.empty())
    throw std::invalid_argument("study timing needs --model <artifact path>");
  const LoadedModel lm = load_model(cfg.model_path);
  const AffineProblem p = build_problem(lm.problem_spec);
  const TimingResult r = lm.method == "lsrcm"
                             ? study_timing(p, lm.ls, cfg.reps)
                             : study_timing(p, lm.ercm, cfg.reps);
  CsvTable t;
  t.comments = {"rcm timing study", "format_version=1",
                "model=" + cfg.model_path,
                "reps=" + std::to_string(cfg.reps)};
  t.columns = {"method",         "n",
               "dofs",           "offline_seconds",
               "online_seconds", "truth_seconds",
               "online_per_truth", "offline_per_truth"};
  t.rows.push_back({lm.method, std::to_string(r.n), std::to_string(r.dofs),
                    fmt_g17(r.offline_seconds), fmt_g17(r.online_seconds),
                    fmt_g17(r.truth_seconds), fmt_g17(r.online_per_truth),
                    fmt_g17(r.offline_per_truth)});
  emit(t, cfg.out_path);
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{
      "certified reduced collocation models for parametrized elliptic "
      "problems"};
  app.require_subcommand(1);
  CliState st;

  CLI::App* offline =
      app.add_subcommand("offline", "train a reduced model and save it");
  add_problem_options(offline, st);
  offline->add_option("--method", st.cfg.method, "lsrcm or ercm")
      ->capture_default_str();
  offline->add_option("--nmax", st.cfg.nmax, "maximum basis size")
      ->capture_default_str();
  offline->add_option("--tol", st.cfg.tol, "greedy stopping tolerance")
      ->capture_default_str();
  offline->add_option("--seed", st.cfg.seed, "first-snapshot draw seed")
      ->capture_default_str();
  offline->add_flag("--ercm-end-mgs", st.cfg.ercm_end_mgs,
                    "recondition the ercm basis after training");
  offline->add_option("--model", st.cfg.model_path, "output artifact path")
      ->required();
  offline->add_option("--config", st.config_path,
                  "key=value configuration file (command-line flags win)");

  CLI::App* online =
      app.add_subcommand("online", "evaluate a saved model at one parameter");
  online->add_option("--model", st.cfg.model_path, "model artifact path")
      ->required();
  online->add_option("--mu", st.cfg.mu, "parameter components")
      ->expected(-1)
      ->delimiter(',');
  online->add_option("--n", st.cfg.n_active,
                     "active basis size (default: full)");
  online->add_option("--out", st.cfg.out_path, "output CSV (default: stdout)");
  online->add_option("--config", st.config_path,
                  "key=value configuration file (command-line flags win)");

  CLI::App* study =
      app.add_subcommand("study", "reproduce the numerical studies");
  study->require_subcommand(1);

  CLI::App* truth = study->add_subcommand(
      "truth", "grid convergence of the full spectral solver");
  add_problem_options(truth, st);
  truth->add_option("--mu", st.cfg.mu, "parameter components")
      ->expected(-1)
      ->delimiter(',');
  truth->add_option("--nx-list", st.cfg.nx_list, "grid orders to measure")
      ->delimiter(',');
  truth->add_option("--ref-nx", st.cfg.ref_nx, "reference grid order")
      ->capture_default_str();
  truth->add_option("--out", st.cfg.out_path, "output CSV (default: stdout)");
  truth->add_option("--config", st.config_path,
                  "key=value configuration file (command-line flags win)");

  CLI::App* rbm = study->add_subcommand(
      "rbm", "reduced-model convergence over a random test set");
  rbm->add_option("--model", st.cfg.model_path, "model artifact path")
      ->required();
  rbm->add_option("--samples", st.cfg.samples, "test sample count")
      ->capture_default_str();
  rbm->add_option("--test-seed", st.cfg.test_seed, "test sampling seed")
      ->capture_default_str();
  rbm->add_option("--out", st.cfg.out_path, "output CSV (default: stdout)");
  rbm->add_option("--config", st.config_path,
                  "key=value configuration file (command-line flags win)");

  CLI::App* naive = study->add_subcommand(
      "naive-points", "collocation on coarse-grid points instead of greedy");
  naive->add_option("--model", st.cfg.model_path, "ercm artifact path")
      ->required();
  naive->add_option("--coarse-orders", st.cfg.coarse_orders,
                    "coarse grid orders to try")
      ->delimiter(',');
  naive->add_option("--samples", st.cfg.samples, "test sample count")
      ->capture_default_str();
  naive->add_option("--test-seed", st.cfg.test_seed, "test sampling seed")
      ->capture_default_str();
  naive->add_option("--out", st.cfg.out_path, "output CSV (default: stdout)");
  naive->add_option("--config", st.config_path,
                  "key=value configuration file (command-line flags win)");

  CLI::App* timing = study->add_subcommand(
      "timing", "offline/online/truth solve times for a saved model");
  timing->add_option("--model", st.cfg.model_path, "model artifact path")
      ->required();
  timing->add_option("--reps", st.cfg.reps, "timing repetitions")
      ->capture_default_str();
  timing->add_option("--out", st.cfg.out_path, "output CSV (default: stdout)");
  timing->add_option("--config", st.config_path,
                  "key=value configuration file (command-line flags win)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    const int code = e.get_exit_code();
    return code == 0 ? 1 : code;
  }

  try {
    if (offline->parsed()) {
      apply_config_file(offline, st.config_path);
      run_offline(st);
    } else if (online->parsed()) {
      apply_config_file(online, st.config_path);
      run_online(st);
    } else if (study->parsed()) {
      if (truth->parsed()) {
        apply_config_file(truth, st.config_path);
        run_study_truth(st);
      }
      if (rbm->parsed()) {
        apply_config_file(rbm, st.config_path);
        run_study_rbm(st);
      }
      if (naive->parsed()) {
        apply_config_file(naive, st.config_path);
        run_study_naive(st);
      }
      if (timing->parsed()) {
        apply_config_file(timing, st.config_path);
        run_study_timing(st);
      }
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace rcm
