#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cmix/processes.hpp"

namespace cmix::io {

/// Malformed input file; message names the offending column or row.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

/// Writes content to a temporary sibling and renames it over path.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// CSV `index,x_1..x_D` (series) or `index,x_1..x_D,y` (dataset).
std::string series_csv(const Series& s);
std::string dataset_csv(const Dataset& ds);

/// Sidecar metadata: generator, grid, seed and truth ids.
nlohmann::json series_sidecar(const Series& s);
nlohmann::json dataset_sidecar(const Dataset& ds);

/// Parsed CSV contents.  has_y is false for series files.
struct Table {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  bool has_y = false;
};

Table parse_csv(const std::string& text);
Table read_csv(const std::filesystem::path& path);

/// Reads a CSV plus its `<path>.json` sidecar (when present) into a
/// dataset.  Truth ids and the y bound come from the sidecar.
Dataset read_dataset(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

}  // namespace cmix::io
