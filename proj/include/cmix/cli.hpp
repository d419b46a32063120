#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace cmix::cli {

/// Bad command line; the message names the offending flag.  Exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string subcommand;
  std::uint64_t seed = 0;
  std::string seed_source;  // flag | env | entropy
  int workers = 1;
  std::string format;       // csv | jsonl
  std::string out;          // empty = stdout
  /// Typed subcommand parameters after defaults are applied.
  nlohmann::json params = nlohmann::json::object();

  /// Fully-resolved configuration echoed into every output.  The worker
  /// count is left out because it never changes results.
  nlohmann::json echo() const;
};

/// Environment variable consulted when --seed is absent.
inline constexpr const char* kSeedEnv = "CMIX_SEED";

/// Throws UsageError.  Returns nullopt when help was printed.
std::optional<RunConfig> parse_args(const std::vector<std::string>& args,
                                    std::ostream& help_out);

/// Dispatches to the library.  Throws on runtime errors.
void run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_args + run with the exit-code convention 0 / 1 / 2.
int main(int argc, char** argv);

}  // namespace cmix::cli
