#include "cmix/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "cmix/bounds.hpp"
#include "cmix/config.hpp"
#include "cmix/empirical_process.hpp"
#include "cmix/harness.hpp"
#include "cmix/io.hpp"
#include "cmix/kernels.hpp"
#include "cmix/processes.hpp"
#include "cmix/smoothers.hpp"

namespace cmix::cli {

namespace {

using nlohmann::json;

enum class Type { Int, Real, Str, Ints, Reals };

struct Param {
  std::string name;
  Type type;
  std::optional<std::string> def;  // nullopt and !required: absent unless given
  bool required = false;
  std::string help;
  std::vector<std::string> choices;
};

struct Command {
  std::string name;
  std::string help;
  std::string default_format;
  std::vector<Param> params;
};

Param req(std::string name, Type type, std::string help, std::vector<std::string> choices = {}) {
  return {std::move(name), type, std::nullopt, true, std::move(help), std::move(choices)};
}
Param opt(std::string name, Type type, std::optional<std::string> def, std::string help,
          std::vector<std::string> choices = {}) {
  return {std::move(name), type, std::move(def), false, std::move(help), std::move(choices)};
}

const std::vector<Command>& commands() {
  static const std::vector<Command> cmds = {
      {"simulate",
       "Simulate a process, optionally with regression responses",
       "csv",
       {req("process", Type::Str, "process id",
            {"doubling", "logistic", "markov", "cell-chain", "lattice", "rademacher"}),
        opt("n", Type::Int, "1000", "series length (ignored for lattice)"),
        opt("burn-in", Type::Int, "1000", "logistic burn-in"),
        opt("P", Type::Str, "0.9,0.1;0.1,0.9", "markov transition rows, ';' separated"),
        opt("states", Type::Reals, "0,1", "markov state labels"),
        opt("cells", Type::Int, "64", "cell-chain cells"),
        opt("rho", Type::Real, "0.5", "cell-chain neighbour weight"),
        opt("d", Type::Int, "1", "lattice index dimension"),
        opt("d-eff", Type::Int, "1", "lattice diverging directions"),
        opt("n0", Type::Int, "1", "lattice count on fixed directions"),
        opt("nk", Type::Ints, std::nullopt, "lattice counts on diverging directions"),
        opt("range", Type::Int, "1", "lattice moving-average radius"),
        opt("mean", Type::Str, std::nullopt, "regression mean id"),
        opt("sigma", Type::Str, "const:0", "regression noise scale id"),
        opt("mode", Type::Str, std::nullopt, "modal dataset mode id"),
        opt("L", Type::Real, "2", "response bound")}},
      {"bound",
       "Evaluate a tail bound at one N and a list of t",
       "jsonl",
       {req("family", Type::Str, "bound family",
            {"geometric", "geometric-1d", "algebraic", "algebraic-fixed-b", "hang-steinwart"}),
        req("N", Type::Real, "sample size"),
        req("t", Type::Reals, "deviations"),
        opt("A", Type::Real, "1", "sup-norm envelope"),
        opt("B", Type::Real, "0", "semi-norm envelope"),
        opt("sigma2", Type::Real, "1", "variance envelope"),
        opt("omega", Type::Real, "2", "omega > 1"),
        opt("alpha", Type::Real, "1", "algebraic alpha"),
        opt("b", Type::Real, "1", "mixing rate constant"),
        opt("gamma", Type::Real, "1", "mixing exponent"),
        opt("nu", Type::Real, "2.718281828459045", "geometric decay base"),
        opt("d", Type::Int, "1", "index dimension"),
        opt("d-eff", Type::Int, "1", "diverging directions"),
        opt("n0", Type::Int, "1", "count on fixed directions")}},
      {"blocks",
       "Print the blocking of a sampling grid",
       "csv",
       {req("nk", Type::Ints, "counts on diverging directions"),
        opt("P", Type::Int, std::nullopt, "block gap"),
        opt("gap", Type::Str, std::nullopt, "gap rule when P is absent",
            {"geometric", "algebraic", "algebraic-fixed-b"}),
        opt("omega", Type::Real, "2", "omega > 1"),
        opt("alpha", Type::Real, "1", "algebraic alpha"),
        opt("b", Type::Real, "1", "mixing rate constant"),
        opt("gamma", Type::Real, "1", "mixing exponent"),
        opt("nu", Type::Real, "2.718281828459045", "geometric decay base")}},
      {"conditions",
       "Check the chaining side conditions and evaluate the supremum bound",
       "jsonl",
       {opt("variant", Type::Str, "prop6", "condition set", {"prop6", "cor7"}),
        req("N", Type::Real, "sample size"),
        req("t", Type::Real, "deviation"),
        req("bandwidth", Type::Real, "bandwidth h"),
        opt("L-N", Type::Real, "1", "truncation level"),
        opt("sigma2", Type::Real, "1", "variance envelope"),
        opt("sigmaF2", Type::Real, "1", "class variance"),
        opt("A", Type::Real, "1", "sup-norm envelope"),
        opt("B", Type::Real, "0", "semi-norm envelope"),
        opt("omega", Type::Real, "2", "omega > 1"),
        opt("b", Type::Real, "1", "mixing rate constant"),
        opt("gamma", Type::Real, "1", "mixing exponent"),
        opt("c", Type::Real, "1", "covering constant"),
        opt("D", Type::Int, "1", "input dimension")}},
      {"estimate",
       "Run a kernel estimator on a CSV produced by simulate",
       "csv",
       {req("input", Type::Str, "input CSV"),
        req("estimator", Type::Str, "estimator", {"kde", "mean", "var", "mode"}),
        opt("bandwidth", Type::Str, "optimal", "optimal | geometric | value:<h>"),
        opt("kernel", Type::Str, "epanechnikov", "kernel id"),
        opt("alpha", Type::Real, "1", "smoothness"),
        opt("gamma", Type::Real, "1", "mixing exponent for the geometric rule"),
        opt("grid-points", Type::Int, "101", "evaluation points"),
        opt("margin", Type::Real, std::nullopt, "interior margin (default h)")}},
      {"verify-tail",
       "Monte Carlo tail probabilities against the bounds",
       "jsonl",
       {req("config", Type::Str, "experiment file"),
        opt("raw", Type::Str, std::nullopt, "raw per-rep CSV path")}},
      {"verify-rate",
       "Monte Carlo convergence-rate fits",
       "jsonl",
       {req("config", Type::Str, "experiment file"),
        opt("raw", Type::Str, std::nullopt, "raw per-rep CSV path")}},
  };
  return cmds;
}

template <class T>
std::optional<T> to_number(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

template <class T>
json convert_list(const std::string& flag, const std::string& text) {
  json arr = json::array();
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    auto v = to_number<T>(item);
    if (!v) throw UsageError(flag + ": cannot parse list item '" + item + "'");
    arr.push_back(*v);
  }
  if (arr.empty()) throw UsageError(flag + ": empty list");
  return arr;
}

json convert(const Param& p, const std::string& text) {
  const std::string flag = "--" + p.name;
  if (!p.choices.empty() &&
      std::find(p.choices.begin(), p.choices.end(), text) == p.choices.end())
    throw UsageError(flag + ": '" + text + "' is not one of " + CLI::detail::join(p.choices, "|"));
  switch (p.type) {
    case Type::Str: return text;
    case Type::Int: {
      auto v = to_number<std::int64_t>(text);
      if (!v) throw UsageError(flag + ": expected an integer, got '" + text + "'");
      return *v;
    }
    case Type::Real: {
      auto v = to_number<double>(text);
      if (!v) throw UsageError(flag + ": expected a number, got '" + text + "'");
      return *v;
    }
    case Type::Ints: return convert_list<std::int64_t>(flag, text);
    case Type::Reals: return convert_list<double>(flag, text);
  }
  return nullptr;
}

std::uint64_t parse_seed(const std::string& what, const std::string& text) {
  auto v = to_number<std::uint64_t>(text);
  if (!v) throw UsageError(what + ": expected an unsigned 64-bit integer, got '" + text + "'");
  return *v;
}

// ---------------------------------------------------------------------------

void emit(const RunConfig& cfg, const std::string& content, std::ostream& out) {
  if (cfg.out.empty())
    out << content;
  else
    io::write_atomic(cfg.out, content);
}

void emit_sidecar(const RunConfig& cfg, json meta) {
  if (cfg.out.empty()) return;
  meta["config"] = cfg.echo();
  io::write_atomic(cfg.out + ".json", meta.dump(2) + "\n");
}

std::string config_record(const RunConfig& cfg) {
  return json{{"record", "config"}, {"config", cfg.echo()}}.dump() + "\n";
}

double num(const json& p, const char* key) { return p.at(key).get<double>(); }
std::int64_t integer(const json& p, const char* key) { return p.at(key).get<std::int64_t>(); }
std::string str(const json& p, const char* key) { return p.at(key).get<std::string>(); }

Eigen::MatrixXd parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  for (std::string row; std::getline(ss, row, ';');) {
    rows.emplace_back();
    std::stringstream rs(row);
    for (std::string item; std::getline(rs, item, ',');) {
      auto v = to_number<double>(item);
      if (!v) throw UsageError("--P: cannot parse entry '" + item + "'");
      rows.back().push_back(*v);
    }
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd P(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != n)
      throw UsageError("--P: transition matrix must be square");
    for (Eigen::Index j = 0; j < n; ++j) P(i, j) = rows[i][j];
  }
  return P;
}

template <class T>
std::vector<T> list(const json& p, const char* key) {
  return p.at(key).get<std::vector<T>>();
}

// ---------------------------------------------------------------------------

void run_simulate(const RunConfig& cfg, std::ostream& out) {
  const auto& p = cfg.params;
  const std::string process = str(p, "process");
  const auto n = integer(p, "n");
  Series s;
  if (process == "doubling") {
    s = simulate_doubling_map(n, cfg.seed);
  } else if (process == "logistic") {
    s = simulate_logistic_map(n, cfg.seed, integer(p, "burn-in"));
  } else if (process == "markov") {
    const auto states = list<double>(p, "states");
    s = simulate_markov_chain(parse_matrix(str(p, "P")),
                              Eigen::Map<const Eigen::VectorXd>(states.data(),
                                                                static_cast<Eigen::Index>(states.size())),
                              n, cfg.seed);
  } else if (process == "cell-chain") {
    s = simulate_cell_chain(static_cast<int>(integer(p, "cells")), num(p, "rho"), n, cfg.seed);
  } else if (process == "lattice") {
    if (!p.contains("nk")) throw UsageError("--nk is required for the lattice process");
    SampleGrid grid(static_cast<int>(integer(p, "d")), static_cast<int>(integer(p, "d-eff")),
                    integer(p, "n0"), list<std::int64_t>(p, "nk"));
    s = simulate_lattice_field(grid, static_cast<int>(integer(p, "range")), cfg.seed);
  } else {
    s = simulate_rademacher(n, cfg.seed);
  }

  const bool has_mean = p.contains("mean"), has_mode = p.contains("mode");
  if (has_mean && has_mode) throw UsageError("--mean and --mode are mutually exclusive");
  const std::uint64_t noise_seed = cfg.seed ^ 0x9e3779b97f4a7c15ULL;
  if (has_mean || has_mode) {
    const Dataset ds = has_mean ? make_regression_dataset(s, str(p, "mean"), str(p, "sigma"),
                                                          num(p, "L"), noise_seed)
                                : make_modal_dataset(s, str(p, "mode"), num(p, "L"), noise_seed);
    if (cfg.format == "csv") {
      emit(cfg, io::dataset_csv(ds), out);
      json meta = io::dataset_sidecar(ds);
      meta["series"] = io::series_sidecar(s);
      emit_sidecar(cfg, meta);
    } else {
      std::string body = config_record(cfg);
      for (Eigen::Index i = 0; i < ds.size(); ++i) {
        json xs = json::array();
        for (Eigen::Index k = 0; k < ds.x.cols(); ++k) xs.push_back(ds.x(i, k));
        body += json{{"index", i + 1}, {"x", xs}, {"y", ds.y[i]}}.dump() + "\n";
      }
      emit(cfg, body, out);
    }
    return;
  }
  if (cfg.format == "csv") {
    emit(cfg, io::series_csv(s), out);
    emit_sidecar(cfg, io::series_sidecar(s));
  } else {
    std::string body = config_record(cfg);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      json xs = json::array();
      for (Eigen::Index k = 0; k < s.dim(); ++k) xs.push_back(s.values(i, k));
      body += json{{"index", i + 1}, {"x", xs}}.dump() + "\n";
    }
    emit(cfg, body, out);
  }
}

void run_bound(const RunConfig& cfg, std::ostream& out) {
  const auto& p = cfg.params;
  const std::string family = str(p, "family");
  const double N = num(p, "N");
  ClassBounds cb{num(p, "A"), num(p, "B"), num(p, "sigma2"), num(p, "sigma2")};
  const int d = static_cast<int>(integer(p, "d")), d_eff = static_cast<int>(integer(p, "d-eff"));
  const SampleGrid grid(d, d_eff, integer(p, "n0"),
                        std::vector<std::int64_t>(static_cast<std::size_t>(std::max(d_eff, 1)), 1));
  std::vector<BoundReport> reports;
  for (double t : list<double>(p, "t")) {
    if (family == "geometric")
      reports.push_back(geometric_bound(N, t, MixingSpec::geometric(num(p, "nu"), num(p, "b"),
                                                                    num(p, "gamma")),
                                        cb, num(p, "omega"), grid));
    else if (family == "geometric-1d")
      reports.push_back(
          geometric_bound_1d(N, t, num(p, "b"), num(p, "gamma"), cb, num(p, "omega")));
    else if (family == "algebraic")
      reports.push_back(algebraic_bound(N, t, MixingSpec::algebraic(num(p, "b"), num(p, "gamma")),
                                        cb, num(p, "alpha"), grid));
    else if (family == "algebraic-fixed-b")
      reports.push_back(algebraic_bound_fixed_b(N, t, num(p, "b"), num(p, "gamma"), cb));
    else
      reports.push_back(hang_steinwart_bound(N, t, num(p, "b"), num(p, "gamma"), cb));
  }
  std::string body;
  if (cfg.format == "jsonl") {
    body = config_record(cfg);
    for (const auto& r : reports) body += r.to_json().dump() + "\n";
  } else {
    body = "family,N,t,bound,raw,N0,n_ge_n0,exponent\n";
    for (const auto& r : reports)
      body += r.family + "," + io::format_double(N) + "," +
              io::format_double(r.params.at("t").get<double>()) + "," +
              io::format_double(r.bound) + "," + io::format_double(r.raw) + "," +
              std::to_string(r.N0) + "," + (r.n_ge_n0 ? "true" : "false") + "," +
              io::format_double(r.exponent) + "\n";
    emit_sidecar(cfg, json::object());
  }
  emit(cfg, body, out);
}

void run_blocks(const RunConfig& cfg, std::ostream& out) {
  const auto& p = cfg.params;
  const auto nk = list<std::int64_t>(p, "nk");
  const int d_eff = static_cast<int>(nk.size());
  const SampleGrid grid(d_eff, d_eff, 1, nk);
  std::int64_t P = 0;
  if (p.contains("P")) {
    P = integer(p, "P");
  } else if (p.contains("gap")) {
    const std::string gap = str(p, "gap");
    const double n_hat = static_cast<double>(grid.n_hat());
    if (gap == "geometric")
      P = block_gap_geometric(n_hat, MixingSpec::geometric(num(p, "nu"), num(p, "b"), num(p, "gamma")),
                              num(p, "omega"));
    else if (gap == "algebraic")
      P = block_gap_algebraic(n_hat, MixingSpec::algebraic(num(p, "b"), num(p, "gamma")),
                              num(p, "alpha"), d_eff);
    else
      P = block_gap_algebraic_fixed_b(n_hat, MixingSpec::algebraic(num(p, "b"), num(p, "gamma")),
                                      d_eff);
  } else {
    throw UsageError("--P or --gap is required");
  }
  const Blocking blk = build_blocking(grid, P);
  std::string body;
  if (cfg.format == "csv") {
    body = "block_id,scalar_index";
    for (int k = 1; k <= d_eff; ++k) body += ",lattice_index_" + std::to_string(k);
    body += "\n";
    for (std::size_t j = 0; j < blk.blocks.size(); ++j)
      for (auto idx : blk.blocks[j]) {
        body += std::to_string(j + 1) + "," + std::to_string(idx);
        for (auto c : blk.lattice(idx)) body += "," + std::to_string(c);
        body += "\n";
      }
    emit_sidecar(cfg, {{"P", blk.P}, {"L_k", blk.L_k}, {"r_k", blk.r_k},
                       {"blocks", blk.blocks.size()}});
  } else {
    body = config_record(cfg);
    for (std::size_t j = 0; j < blk.blocks.size(); ++j)
      for (auto idx : blk.blocks[j])
        body += json{{"block_id", j + 1}, {"scalar_index", idx}, {"lattice_index", blk.lattice(idx)}}
                    .dump() +
                "\n";
  }
  emit(cfg, body, out);
}

void run_conditions(const RunConfig& cfg, std::ostream& out) {
  const auto& p = cfg.params;
  ChainParams cp;
  cp.N = num(p, "N");
  cp.t = num(p, "t");
  cp.L_N = num(p, "L-N");
  cp.sigma2 = num(p, "sigma2");
  cp.sigmaF2 = num(p, "sigmaF2");
  cp.A = num(p, "A");
  cp.B = num(p, "B");
  cp.omega = num(p, "omega");
  cp.b = num(p, "b");
  cp.gamma = num(p, "gamma");
  EntropySpec es{num(p, "c"), num(p, "bandwidth"), static_cast<int>(integer(p, "D"))};
  const bool prop6 = str(p, "variant") == "prop6";
  const auto cond = prop6 ? check_conditions_prop6(cp, es) : check_conditions_cor7(cp, es);
  const auto bound = prop6 ? prop6_bound(cp, es) : cor7_bound(cp, es);
  json rec = cond.to_json();
  rec["bound"] = bound.to_json();
  std::string body;
  if (cfg.format == "jsonl") {
    body = config_record(cfg) + rec.dump() + "\n";
  } else {
    body = "key,value\n";
    for (const auto& [k, v] : cond.to_json().items())
      body += k + "," + (v.is_boolean() ? (v.get<bool>() ? "true" : "false")
                                        : io::format_double(v.get<double>())) +
              "\n";
    body += "bound," + io::format_double(bound.bound) + "\n";
    emit_sidecar(cfg, json::object());
  }
  emit(cfg, body, out);
}

void run_estimate(const RunConfig& cfg, std::ostream& out) {
  const auto& p = cfg.params;
  const io::Table table = io::read_csv(str(p, "input"));
  if (table.x.cols() != 1)
    throw std::runtime_error("estimate works on one-dimensional inputs only");
  const std::string estimator = str(p, "estimator");
  if (estimator != "kde" && !table.has_y)
    throw std::runtime_error("estimator '" + estimator + "' needs a y column");

  RateConfig rule;
  rule.estimator = estimator;
  rule.bandwidth = str(p, "bandwidth");
  rule.alpha = num(p, "alpha");
  rule.gamma = num(p, "gamma");
  double h = 0.0;
  try {
    h = rule.bandwidth_for(table.x.rows());
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--bandwidth: ") + e.what());
  }
  const Kernel<double> kernel(parse_kernel_id(str(p, "kernel")), 1);
  const double margin = p.contains("margin") ? num(p, "margin") : h;
  const auto grid = interior_grid<double>(margin, integer(p, "grid-points"));

  Estimate<double> est;
  if (estimator == "kde") {
    est.values = kde<double>(table.x, h, kernel, grid.points);
    est.defined = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(est.values.size(), true);
  } else if (estimator == "mean") {
    est = nw_mean<double>(table.x, table.y, h, kernel, grid.points);
  } else if (estimator == "var") {
    est = two_step_variance<double>(table.x, table.y, h, kernel, grid.points);
  } else {
    const auto gy = spaced_grid<double>(table.y.minCoeff() - h, table.y.maxCoeff() + h, h * h);
    est = modal_regression<double>(table.x, table.y, h, kernel, kernel, grid.points, gy);
  }

  std::string body;
  if (cfg.format == "csv") {
    body = "grid_point,estimate,defined\n";
    for (Eigen::Index g = 0; g < est.size(); ++g)
      body += io::format_double(grid.points(g, 0)) + "," +
              (est.defined[g] ? io::format_double(est.values[g]) : std::string("nan")) + "," +
              (est.defined[g] ? "1" : "0") + "\n";
    emit_sidecar(cfg, {{"bandwidth", h}, {"N", table.x.rows()}});
  } else {
    body = json{{"record", "config"}, {"config", cfg.echo()}, {"bandwidth", h}}.dump() + "\n";
    for (Eigen::Index g = 0; g < est.size(); ++g)
      body += json{{"grid_point", grid.points(g, 0)},
                   {"estimate", est.defined[g] ? json(est.values[g]) : json(nullptr)},
                   {"defined", bool(est.defined[g])}}
                  .dump() +
              "\n";
  }
  emit(cfg, body, out);
}

std::string tag_lines(const std::string& jsonl, const std::string& section) {
  std::string out;
  std::istringstream in(jsonl);
  for (std::string line; std::getline(in, line);) {
    auto j = json::parse(line);
    j["section"] = section;
    out += j.dump() + "\n";
  }
  return out;
}

void write_raw(const RunConfig& cfg, const std::string& raw) {
  const auto& p = cfg.params;
  if (p.contains("raw"))
    io::write_atomic(str(p, "raw"), raw);
  else if (!cfg.out.empty())
    io::write_atomic(cfg.out + ".raw.csv", raw);
}

void run_verify_tail(const RunConfig& cfg, std::ostream& out) {
  auto sections = load_experiments(str(cfg.params, "config"));
  std::string report = config_record(cfg), raw = "section,N,rep,mean\n";
  std::string table = "section,N,t,exceed,probability,ci_lo,ci_hi,geometric_1d,hang_steinwart,"
                      "algebraic_fixed_b,n_ge_n0,sound\n";
  int ran = 0;
  for (auto& s : sections) {
    if (s.type != "tail") continue;
    s.apply_default_seed(cfg.seed);
    const auto tail = tail_probability(s.tail, cfg.workers);
    const auto rows = bound_comparison(s.tail, tail, s.omega, s.b, s.gamma);
    auto lines = tail_report_jsonl(s.tail, tail, rows);
    report += tag_lines(lines, s.name);
    const auto raw_s = tail_raw_csv(s.tail, tail);
    std::istringstream in(raw_s);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) raw += s.name + "," + line + "\n";
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto& pt = tail.points[k];
      const auto& r = rows[k];
      table += s.name + "," + std::to_string(pt.N) + "," + io::format_double(pt.t) + "," +
               std::to_string(pt.exceed) + "," + io::format_double(pt.probability) + "," +
               io::format_double(pt.ci.lo) + "," + io::format_double(pt.ci.hi) + "," +
               io::format_double(r.ours.bound) + "," + io::format_double(r.earlier.bound) + "," +
               io::format_double(r.algebraic.bound) + "," + (r.ours.n_ge_n0 ? "true" : "false") +
               "," + (r.sound ? "true" : "false") + "\n";
    }
    ++ran;
  }
  if (ran == 0) throw std::runtime_error("config has no tail sections");
  emit(cfg, cfg.format == "jsonl" ? report : table, out);
  write_raw(cfg, raw);
}

void run_verify_rate(const RunConfig& cfg, std::ostream& out) {
  auto sections = load_experiments(str(cfg.params, "config"));
  std::string report = config_record(cfg), raw = "section,N,rep,sup_error\n";
  std::string table = "section,N,bandwidth,median_sup_error,aborted,slope,slope_se,target_exponent\n";
  int ran = 0;
  for (auto& s : sections) {
    if (s.type != "rate") continue;
    s.apply_default_seed(cfg.seed);
    const auto rep = rate_experiment(s.rate, cfg.workers);
    report += tag_lines(rate_report_jsonl(s.rate, rep), s.name);
    const auto raw_s = rate_raw_csv(s.rate, rep);
    std::istringstream in(raw_s);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) raw += s.name + "," + line + "\n";
    for (std::size_t k = 0; k < rep.Ns.size(); ++k)
      table += s.name + "," + std::to_string(rep.Ns[k]) + "," +
               io::format_double(rep.bandwidths[k]) + "," +
               io::format_double(rep.median_sup_errors[k]) + "," + std::to_string(rep.aborted[k]) +
               "," + io::format_double(rep.slope) + "," + io::format_double(rep.slope_se) + "," +
               io::format_double(rep.target_exponent) + "\n";
    ++ran;
  }
  if (ran == 0) throw std::runtime_error("config has no rate sections");
  emit(cfg, cfg.format == "jsonl" ? report : table, out);
  write_raw(cfg, raw);
}

}  // namespace

json RunConfig::echo() const {
  return {{"subcommand", subcommand}, {"seed", seed},   {"seed_source", seed_source},
          {"format", format},         {"out", out},     {"params", params}};
}

std::optional<RunConfig> parse_args(const std::vector<std::string>& args, std::ostream& help_out) {
  CLI::App app{"Concentration bounds and kernel estimators for C-mixing processes", "cmix"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string seed_text, format, out_path;
  int workers = 1;
  app.add_option("--seed", seed_text, "master seed (default: $" + std::string(kSeedEnv) +
                                          ", else drawn from entropy)");
  app.add_option("--workers", workers, "parallel workers for verify-*")->check(CLI::PositiveNumber);
  app.add_option("--format", format, "csv | jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  app.add_option("--out", out_path, "output path (default stdout)");

  std::map<std::string, std::map<std::string, std::string>> raw;
  for (const auto& cmd : commands()) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    auto& store = raw[cmd.name];
    for (const auto& p : cmd.params) {
      auto* o = sub->add_option("--" + p.name, store[p.name], p.help);
      if (p.required) o->required();
      if (p.def) o->default_str(*p.def);
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    help_out << app.help();
    return std::nullopt;
  } catch (const CLI::CallForAllHelp&) {
    help_out << app.help("", CLI::AppFormatMode::All);
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  RunConfig cfg;
  const Command* active = nullptr;
  for (const auto& cmd : commands())
    if (app.got_subcommand(cmd.name)) active = &cmd;
  cfg.subcommand = active->name;
  auto* sub = app.get_subcommand(active->name);
  for (const auto& p : active->params) {
    const auto* o = sub->get_option("--" + p.name);
    if (o->count() > 0)
      cfg.params[p.name] = convert(p, raw[active->name][p.name]);
    else if (p.def)
      cfg.params[p.name] = convert(p, *p.def);
  }
  cfg.workers = workers;
  cfg.format = format.empty() ? active->default_format : format;
  cfg.out = out_path;

  if (!seed_text.empty()) {
    cfg.seed = parse_seed("--seed", seed_text);
    cfg.seed_source = "flag";
  } else if (const char* env = std::getenv(kSeedEnv); env && *env) {
    cfg.seed = parse_seed(kSeedEnv, env);
    cfg.seed_source = "env";
  } else {
    std::random_device rd;
    cfg.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    cfg.seed_source = "entropy";
  }
  return cfg;
}

void run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  err << "config: " << config.echo().dump() << "\n";
  const auto& s = config.subcommand;
  if (s == "simulate") return run_simulate(config, out);
  if (s == "bound") return run_bound(config, out);
  if (s == "blocks") return run_blocks(config, out);
  if (s == "conditions") return run_conditions(config, out);
  if (s == "estimate") return run_estimate(config, out);
  if (s == "verify-tail") return run_verify_tail(config, out);
  if (s == "verify-rate") return run_verify_rate(config, out);
  throw UsageError("unknown subcommand '" + s + "'");
}

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  std::optional<RunConfig> cfg;
  try {
    cfg = parse_args(args, std::cout);
    if (!cfg) return 0;
    run(*cfg, std::cout, std::cerr);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace cmix::cli
