#include "cmix/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace cmix::io {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("cannot format double");
  return std::string(buf, end);
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string header(Eigen::Index dim, bool with_y) {
  std::string h = "index";
  for (Eigen::Index k = 1; k <= dim; ++k) h += ",x_" + std::to_string(k);
  if (with_y) h += ",y";
  return h + "\n";
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& cell, std::size_t row, const std::string& column) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw FormatError("row " + std::to_string(row) + ": column '" + column +
                      "' is not a number: '" + cell + "'");
  return v;
}

nlohmann::json grid_json(const SampleGrid& g) {
  return {{"d", g.d()},
          {"d_eff", g.d_eff()},
          {"n0", g.n0()},
          {"n_k", g.diverging_counts()},
          {"N", g.size()}};
}

}  // namespace

std::string series_csv(const Series& s) {
  std::string out = header(s.dim(), false);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    out += std::to_string(i + 1);
    for (Eigen::Index k = 0; k < s.dim(); ++k) out += "," + format_double(s.values(i, k));
    out += "\n";
  }
  return out;
}

std::string dataset_csv(const Dataset& ds) {
  std::string out = header(ds.dim(), true);
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    out += std::to_string(i + 1);
    for (Eigen::Index k = 0; k < ds.dim(); ++k) out += "," + format_double(ds.x(i, k));
    out += "," + format_double(ds.y[i]) + "\n";
  }
  return out;
}

nlohmann::json series_sidecar(const Series& s) {
  return {{"kind", "series"},
          {"process", s.process},
          {"params", s.params},
          {"seed", s.seed},
          {"grid", grid_json(s.grid)},
          {"truth", {{"density", s.density}}}};
}

nlohmann::json dataset_sidecar(const Dataset& ds) {
  nlohmann::json j = {{"kind", "dataset"},
                      {"meta", ds.meta},
                      {"truth",
                       {{"density", ds.truth.density},
                        {"mean", ds.truth.mean},
                        {"sigma", ds.truth.sigma},
                        {"mode", ds.truth.mode}}}};
  if (ds.y_bound) j["y_bound"] = *ds.y_bound;
  return j;
}

Table parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty CSV input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto cols = split(line);
  if (cols.empty() || cols[0] != "index")
    throw FormatError("bad CSV header: first column must be 'index', got '" +
                      (cols.empty() ? std::string() : cols[0]) + "'");
  Table t;
  t.has_y = cols.back() == "y";
  const std::size_t dim = cols.size() - 1 - (t.has_y ? 1 : 0);
  if (dim == 0) throw FormatError("bad CSV header: no x_1 column");
  for (std::size_t k = 1; k <= dim; ++k)
    if (cols[k] != "x_" + std::to_string(k))
      throw FormatError("bad CSV header: expected column 'x_" + std::to_string(k) +
                        "', got '" + cols[k] + "'");

  std::vector<double> xs, ys;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    auto cells = split(line);
    if (cells.size() != cols.size())
      throw FormatError("row " + std::to_string(row) + ": expected " +
                        std::to_string(cols.size()) + " columns, got " +
                        std::to_string(cells.size()));
    for (std::size_t k = 1; k <= dim; ++k) xs.push_back(parse_number(cells[k], row, cols[k]));
    if (t.has_y) ys.push_back(parse_number(cells.back(), row, "y"));
  }
  const auto n = static_cast<Eigen::Index>(row);
  t.x = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      xs.data(), n, static_cast<Eigen::Index>(dim));
  if (t.has_y) t.y = Eigen::Map<Eigen::VectorXd>(ys.data(), n);
  return t;
}

Table read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

Dataset read_dataset(const std::filesystem::path& path) {
  Table t = read_csv(path);
  Dataset ds;
  ds.x = std::move(t.x);
  if (t.has_y) ds.y = std::move(t.y);
  auto sidecar = path;
  sidecar += ".json";
  if (std::filesystem::exists(sidecar)) {
    auto j = nlohmann::json::parse(read_file(sidecar));
    if (j.contains("y_bound")) ds.y_bound = j["y_bound"].get<double>();
    if (j.contains("truth")) {
      const auto& tr = j["truth"];
      ds.truth.density = tr.value("density", "");
      ds.truth.mean = tr.value("mean", "");
      ds.truth.sigma = tr.value("sigma", "");
      ds.truth.mode = tr.value("mode", "");
    }
    ds.meta = j.value("meta", nlohmann::json::object());
  }
  return ds;
}

}  // namespace cmix::io
