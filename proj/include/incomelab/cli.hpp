#pragma once

// Command drivers behind the incomelab executable. Each command reads one
// JSON block of settings, writes its files under the output directory and
// returns a process exit code.

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "incomelab/common.hpp"

namespace incomelab::cli {

enum ExitCode : int { ok = 0, config_error = 1, numeric_failure = 2, fit_not_converged = 3 };

class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::filesystem::path out = ".";
  std::string format = "csv";  // csv | json, for tabular outputs
};

const std::vector<std::string>& command_names();

/// The block for `command` from a config file holding one top-level block
/// per command. Unknown top-level names are rejected.
nlohmann::json load_config_block(const std::filesystem::path& path, const std::string& command);

int cmd_simulate_market(const GlobalOptions& g, const nlohmann::json& block);
int cmd_simulate_firms(const GlobalOptions& g, const nlohmann::json& block);
int cmd_simulate_wages(const GlobalOptions& g, const nlohmann::json& block);
int cmd_simulate_prices(const GlobalOptions& g, const nlohmann::json& block);
int cmd_sample(const GlobalOptions& g, const nlohmann::json& block);
int cmd_fit(const GlobalOptions& g, const nlohmann::json& block);
int cmd_oracle_entropy(const GlobalOptions& g, const nlohmann::json& block);

/// Dispatches by name and maps exceptions to exit codes, printing the
/// message to stderr.
int run_command(const std::string& command, const GlobalOptions& g, const nlohmann::json& block);

}  // namespace incomelab::cli
