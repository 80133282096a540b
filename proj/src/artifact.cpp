// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "rcm/artifact.hpp"

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rcm/errors.hpp"

namespace rcm {

namespace {

using nlohmann::ordered_json;

constexpr char kMagic[9] = "RCMMODEL";  // 8 payload bytes + terminator
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_f64(std::string& out, double d) {
  put_u64(out, std::bit_cast<std::uint64_t>(d));
}

using NamedArrays = std::vector<std::pair<std::string, Eigen::MatrixXd>>;

void add_common(NamedArrays& a, const ProblemSpec& spec,
                const Eigen::MatrixXd& selected, const Eigen::MatrixXd& basis,
                const EstimatorCache& cache, const StabilityTable& table,
                const std::vector<TrainLogEntry>& log, double terminal,
                double train_seconds) {
  a.emplace_back("domain_lo", spec.domain.lo);
  a.emplace_back("domain_hi", spec.domain.hi);
  a.emplace_back("train_counts", spec.domain.train_counts.cast<double>());
  a.emplace_back("selected_mus", selected);
  a.emplace_back("basis", basis);
  a.emplace_back("cache_ff", cache.ff);
  a.emplace_back("cache_lulu", cache.lulu);
  a.emplace_back("cache_flu", cache.flu);
  a.emplace_back("stability_points", table.points);
  a.emplace_back("stability_values", table.values);
  const Index rows = static_cast<Index>(log.size());
  Eigen::MatrixXd log_mus(rows, spec.domain.dim());
  Eigen::VectorXd log_delta(rows);
  for (Index i = 0; i < rows; ++i) {
    log_mus.row(i) = log[static_cast<std::size_t>(i)].mu.transpose();
    log_delta[i] = log[static_cast<std::size_t>(i)].max_delta;
  }
  a.emplace_back("log_mus", log_mus);
  a.emplace_back("log_max_delta", log_delta);
  Eigen::Vector2d timing(train_seconds, table.build_seconds);
  a.emplace_back("timing_seconds", timing);
  a.emplace_back("terminal_max_delta",
                 Eigen::MatrixXd::Constant(1, 1, terminal));
}

ordered_json term_list(
    const std::vector<std::pair<std::string, std::string>>& terms) {
  ordered_json list = ordered_json::array();
  for (const auto& [tag, expr] : terms)
    list.push_back(ordered_json::array({tag, expr}));
  return list;
}

std::string payload(const std::string& method, const ProblemSpec& spec,
                    const std::map<std::string, std::string>& config_echo,
                    const NamedArrays& arrays) {
  ordered_json meta;
  meta["method"] = method;
  ordered_json prob;
  prob["name"] = spec.name;
  prob["nx"] = static_cast<int>(spec.nx);
  prob["ny"] = static_cast<int>(spec.ny);
  prob["ops"] = term_list(spec.ops);
  prob["rhs"] = term_list(spec.rhs);
  meta["problem"] = prob;
  meta["config"] = config_echo;
  const std::string meta_text = meta.dump();

  std::string out;
  out.append(kMagic, 8);
  put_u32(out, kVersion);
  put_u64(out, meta_text.size());
  out.append(meta_text);
  put_u64(out, arrays.size());
  for (const auto& [name, m] : arrays) {
    put_u64(out, name.size());
    out.append(name);
    put_u64(out, static_cast<std::uint64_t>(m.rows()));
    put_u64(out, static_cast<std::uint64_t>(m.cols()));
    for (Index c = 0; c < m.cols(); ++c)
      for (Index r = 0; r < m.rows(); ++r) put_f64(out, m(r, c));
  }
  return out;
}

void write_atomic(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ArtifactError("cannot open " + tmp + " for writing");
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    os.flush();
    if (!os.good()) throw ArtifactError("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw ArtifactError("cannot move " + tmp + " into place at " + path);
}

class Reader {
 public:
  explicit Reader(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ArtifactError("cannot open model artifact " + path);
    data_.assign(std::istreambuf_iterator<char>(is),
                 std::istreambuf_iterator<char>());
    if (is.bad()) throw ArtifactError("read failed for " + path);
  }

  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(
               static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)]))
           << (8 * i);
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(
               static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)]))
           << (8 * i);
    pos_ += 8;
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size() || pos_ + n < pos_)
      throw ArtifactError("truncated model artifact");
  }

  std::string data_;
  std::size_t pos_ = 0;
};

const Eigen::MatrixXd& pick(const std::map<std::string, Eigen::MatrixXd>& arrays,
                            const std::string& name) {
  const auto it = arrays.find(name);
  if (it == arrays.end())
    throw ArtifactError("model artifact missing array " + name);
  return it->second;
}

Eigen::VectorXd pick_vec(const std::map<std::string, Eigen::MatrixXd>& arrays,
                         const std::string& name) {
  const Eigen::MatrixXd& m = pick(arrays, name);
  if (m.cols() != 1)
    throw ArtifactError("model artifact array " + name + " is not a vector");
  return m.col(0);
}

std::vector<std::pair<std::string, std::string>> read_terms(
    const ordered_json& list) {
  std::vector<std::pair<std::string, std::string>> terms;
  for (const auto& el : list)
    terms.emplace_back(el.at(0).get<std::string>(),
                       el.at(1).get<std::string>());
  return terms;
}

}  // namespace

void save_model(const std::string& path, const ProblemSpec& spec,
                const LsModel& m,
                const std::map<std::string, std::string>& config_echo) {
  NamedArrays a;
  add_common(a, spec, m.selected_mus, m.basis, m.cache, m.stability, m.log,
             m.terminal_max_delta, m.train_seconds);
  write_atomic(path, payload("lsrcm", spec, config_echo, a));
}

void save_model(const std::string& path, const ProblemSpec& spec,
                const ErcmModel& m,
                const std::map<std::string, std::string>& config_echo) {
  NamedArrays a;
  add_common(a, spec, m.selected_mus, m.basis, m.cache, m.stability, m.log,
             m.terminal_max_delta, m.train_seconds);
  a.emplace_back("points", m.points);
  a.emplace_back("point_dofs", m.point_dofs.cast<double>());
  a.emplace_back("b_matrix", m.b_matrix);
  a.emplace_back("rhs_rows", m.rhs_rows);
  for (std::size_t q = 0; q < m.op_rows.size(); ++q)
    a.emplace_back("op_rows_" + std::to_string(q), m.op_rows[q]);
  write_atomic(path, payload("ercm", spec, config_echo, a));
}

LoadedModel load_model(const std::string& path) {
  Reader r(path);
  if (r.bytes(8) != std::string(kMagic, 8))
    throw ArtifactError(path + " is not a model artifact");
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw ArtifactError("unsupported model artifact version " +
                        std::to_string(version));
  const std::string meta_text = r.bytes(r.u64());
  const ordered_json meta = ordered_json::parse(meta_text, nullptr, false);
  if (meta.is_discarded())
    throw ArtifactError("malformed metadata in model artifact");

  std::map<std::string, Eigen::MatrixXd> arrays;
  const std::uint64_t count = r.u64();
  for (std::uint64_t k = 0; k < count; ++k) {
    const std::string name = r.bytes(r.u64());
    const std::uint64_t rows = r.u64();
    const std::uint64_t cols = r.u64();
    if (rows > (1u << 24) || cols > (1u << 24))
      throw ArtifactError("implausible array extents in model artifact");
    Eigen::MatrixXd m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (Index c = 0; c < m.cols(); ++c)
      for (Index rr = 0; rr < m.rows(); ++rr) m(rr, c) = r.f64();
    arrays[name] = std::move(m);
  }

  LoadedModel out;
  try {
    out.method = meta.at("method").get<std::string>();
    const ordered_json& prob = meta.at("problem");
    out.problem_spec.name = prob.at("name").get<std::string>();
    out.problem_spec.nx = prob.at("nx").get<int>();
    out.problem_spec.ny = prob.at("ny").get<int>();
    out.problem_spec.ops = read_terms(prob.at("ops"));
    out.problem_spec.rhs = read_terms(prob.at("rhs"));
    for (const auto& [k, v] : meta.at("config").items())
      out.config_echo[k] = v.get<std::string>();
  } catch (const ordered_json::exception& e) {
    throw ArtifactError(std::string("malformed metadata in model artifact: ") +
                        e.what());
  }
  if (out.method != "lsrcm" && out.method != "ercm")
    throw ArtifactError("unknown model method " + out.method);

  out.problem_spec.domain.lo = pick_vec(arrays, "domain_lo");
  out.problem_spec.domain.hi = pick_vec(arrays, "domain_hi");
  out.problem_spec.domain.train_counts =
      pick_vec(arrays, "train_counts").cast<int>();

  const Eigen::MatrixXd& selected = pick(arrays, "selected_mus");
  const Eigen::MatrixXd& basis = pick(arrays, "basis");
  EstimatorCache cache;
  cache.ff = pick(arrays, "cache_ff");
  cache.lulu = pick(arrays, "cache_lulu");
  cache.flu = pick(arrays, "cache_flu");
  cache.n = basis.cols();
  cache.qa = static_cast<Index>(out.problem_spec.ops.size());
  cache.qf = cache.ff.rows();
  if (cache.qa < 1 || cache.lulu.rows() != cache.n * cache.qa ||
      cache.lulu.cols() != cache.n * cache.qa ||
      cache.flu.rows() != cache.qf || cache.flu.cols() != cache.n * cache.qa)
    throw ArtifactError("inconsistent residual tensors in model artifact");

  StabilityTable table;
  table.points = pick(arrays, "stability_points");
  table.values = pick_vec(arrays, "stability_values");
  const Eigen::VectorXd timing = pick_vec(arrays, "timing_seconds");
  if (timing.size() != 2)
    throw ArtifactError("inconsistent timing data in model artifact");
  table.build_seconds = timing[1];

  const Eigen::MatrixXd& log_mus = pick(arrays, "log_mus");
  const Eigen::VectorXd log_delta = pick_vec(arrays, "log_max_delta");
  if (log_mus.rows() != log_delta.size() || log_mus.rows() != selected.rows())
    throw ArtifactError("inconsistent greedy log in model artifact");
  std::vector<TrainLogEntry> log;
  for (Index i = 0; i < log_mus.rows(); ++i)
    log.push_back({i + 1, log_mus.row(i).transpose(), log_delta[i]});

  const double terminal = pick(arrays, "terminal_max_delta")(0, 0);

  if (out.method == "lsrcm") {
    out.ls.selected_mus = selected;
    out.ls.basis = basis;
    out.ls.cache = std::move(cache);
    out.ls.stability = std::move(table);
    out.ls.log = std::move(log);
    out.ls.terminal_max_delta = terminal;
    out.ls.train_seconds = timing[0];
  } else {
    out.ercm.selected_mus = selected;
    out.ercm.basis = basis;
    out.ercm.cache = std::move(cache);
    out.ercm.stability = std::move(table);
    out.ercm.log = std::move(log);
    out.ercm.terminal_max_delta = terminal;
    out.ercm.train_seconds = timing[0];
    out.ercm.points = pick(arrays, "points");
    out.ercm.point_dofs = pick_vec(arrays, "point_dofs").cast<int>();
    out.ercm.b_matrix = pick(arrays, "b_matrix");
    out.ercm.rhs_rows = pick(arrays, "rhs_rows");
    out.ercm.op_rows.clear();
    for (Index q = 0; q < cache.qa; ++q)
      out.ercm.op_rows.push_back(
          pick(arrays, "op_rows_" + std::to_string(q)));
    if (out.ercm.points.rows() != basis.cols() || out.ercm.points.cols() != 2)
      throw ArtifactError("inconsistent collocation points in model artifact");
  }
  return out;
}

}  // namespace rcm
