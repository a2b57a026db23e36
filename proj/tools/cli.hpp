#pragma once

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqreview::cli {

/// A configuration problem attributable to one key (flag or config entry).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& reason) : std::runtime_error(reason), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Reads a flat `key = value` file. Blank lines and lines starting with '#'
/// are ignored. Throws ConfigError on malformed or duplicate entries.
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Runs one command line; args[0] is the program name. Results go to `out`
/// (or to the --out file), diagnostics to `err` as single lines of the form
/// "error: <key>: <reason>". Returns the process exit code: 0 on success,
/// 2 for configuration errors and 1 for failures while running.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace seqreview::cli
