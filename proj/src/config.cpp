#include "cmix/config.hpp"

#include <charconv>
#include <set>
#include <sstream>

#include <boost/algorithm/string/trim.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "cmix/io.hpp"

namespace cmix {

namespace {

namespace pt = boost::property_tree;

[[noreturn]] void fail(const std::string& section, const std::string& key,
                       const std::string& what) {
  throw ConfigError("[" + section + "] " + key + ": " + what);
}

template <class T>
T parse_number(const std::string& section, const std::string& key, std::string text) {
  boost::algorithm::trim(text);
  T v{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    fail(section, key, "cannot parse '" + text + "'");
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& section, const std::string& key,
                          const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_number<T>(section, key, item));
  if (out.empty()) fail(section, key, "empty list");
  return out;
}

const std::set<std::string> kTailKeys = {"type", "process", "statistic", "Ns",    "reps",
                                         "t_grid", "seed",  "omega",     "b",     "gamma"};
const std::set<std::string> kRateKeys = {"type",  "estimator", "process", "Ns",    "reps",
                                         "bandwidth", "alpha", "gamma",   "kernel", "grid_points",
                                         "seed",  "mean",      "sigma",   "mode",  "L"};

ExperimentSection parse_section(const std::string& name, const pt::ptree& tree) {
  ExperimentSection s;
  s.name = name;
  const auto type = tree.get_optional<std::string>("type");
  if (!type) fail(name, "type", "missing (tail | rate)");
  s.type = boost::algorithm::trim_copy(*type);
  if (s.type != "tail" && s.type != "rate") fail(name, "type", "must be tail or rate");
  const auto& allowed = s.type == "tail" ? kTailKeys : kRateKeys;

  for (const auto& [key, node] : tree) {
    if (!node.empty()) fail(name, key, "nested values are not supported");
    if (!allowed.count(key)) fail(name, key, "unknown key for a " + s.type + " section");
    const std::string value = boost::algorithm::trim_copy(node.data());
    if (key == "type") continue;
    if (key == "seed") {
      s.has_seed = true;
      const auto seed = parse_number<std::uint64_t>(name, key, value);
      s.tail.seed = seed;
      s.rate.seed = seed;
    } else if (key == "Ns") {
      s.tail.Ns = parse_list<std::int64_t>(name, key, value);
      s.rate.Ns = s.tail.Ns;
    } else if (key == "reps") {
      s.tail.reps = parse_number<std::int64_t>(name, key, value);
      s.rate.reps = s.tail.reps;
    } else if (key == "process") {
      s.tail.process = value;
      s.rate.process = value;
    } else if (key == "gamma") {
      s.gamma = parse_number<double>(name, key, value);
      s.rate.gamma = s.gamma;
    } else if (key == "statistic") {
      s.tail.statistic = value;
    } else if (key == "t_grid") {
      s.tail.t_grid = parse_list<double>(name, key, value);
    } else if (key == "omega") {
      s.omega = parse_number<double>(name, key, value);
    } else if (key == "b") {
      s.b = parse_number<double>(name, key, value);
    } else if (key == "estimator") {
      s.rate.estimator = value;
    } else if (key == "bandwidth") {
      s.rate.bandwidth = value;
    } else if (key == "alpha") {
      s.rate.alpha = parse_number<double>(name, key, value);
    } else if (key == "kernel") {
      s.rate.kernel = value;
    } else if (key == "grid_points") {
      s.rate.grid_points = parse_number<std::int64_t>(name, key, value);
    } else if (key == "mean") {
      s.rate.mean = value;
    } else if (key == "sigma") {
      s.rate.sigma = value;
    } else if (key == "mode") {
      s.rate.mode = value;
    } else if (key == "L") {
      s.rate.L = parse_number<double>(name, key, value);
    }
  }
  try {
    if (s.type == "tail") {
      s.tail.validate();
      if (!(s.omega > 1.0)) fail(name, "omega", "must be > 1");
      if (!(s.b > 0.0) || !(s.gamma > 0.0)) fail(name, "b/gamma", "must be > 0");
    } else {
      s.rate.validate();
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("[" + name + "] " + e.what());
  }
  return s;
}

}  // namespace

void ExperimentSection::apply_default_seed(std::uint64_t seed) {
  if (has_seed) return;
  tail.seed = seed;
  rate.seed = seed;
  has_seed = true;
}

nlohmann::json ExperimentSection::to_json() const {
  nlohmann::json j = {{"name", name}, {"type", type}};
  if (type == "tail") {
    j["experiment"] = tail.to_json();
    j["omega"] = omega;
    j["b"] = b;
    j["gamma"] = gamma;
  } else {
    j["experiment"] = rate.to_json();
  }
  return j;
}

std::vector<ExperimentSection> parse_experiments(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  std::vector<ExperimentSection> out;
  for (const auto& [name, node] : tree) {
    if (node.empty())
      throw ConfigError("key '" + name + "' appears outside any [section]");
    out.push_back(parse_section(name, node));
  }
  if (out.empty()) throw ConfigError("config has no sections");
  return out;
}

std::vector<ExperimentSection> load_experiments(const std::filesystem::path& path) {
  return parse_experiments(io::read_file(path));
}

}  // namespace cmix
