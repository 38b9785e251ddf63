#ifndef OPTOMECH_CLI_HPP
#define OPTOMECH_CLI_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace optomech::cli {

// Exit codes: 0 success, 1 reproduction verdict failed, 2 usage or
// configuration error, 3 internal (numerical / IO) failure.
inline constexpr int k_exit_ok = 0;
inline constexpr int k_exit_verdict_fail = 1;
inline constexpr int k_exit_usage = 2;
inline constexpr int k_exit_internal = 3;

// Written as manifest.json next to every command's outputs. The timestamp is
// the only field that differs between identical reruns.
struct RunManifest {
  std::string command;
  nlohmann::json arguments;    // resolved subcommand options
  nlohmann::json config;       // full effective configuration
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::string format = "csv";
  std::vector<std::string> outputs;
  std::string version;
  std::string timestamp_utc;

  nlohmann::json to_json() const;
};

// Subcommand entry points; config_path empty selects the built-in defaults.
// Each writes its data files plus manifest.json into the output directory
// and returns the process exit code.

// Budget over a log grid "lo:hi:n" (Hz); prints the back-action-to-thermal
// ratio at the configured analysis frequency on stdout.
int cmd_budget(const std::string& config_path, const std::string& grid_spec,
               const std::string& out_path, std::uint64_t seed, unsigned jobs,
               const std::string& format);

// Synthesizes the selected force noise sources (comma list or "all") at the
// configured simulation sample rate and writes the summed series.
int cmd_simulate(const std::string& config_path, const std::string& source_selection,
                 double duration_s, std::uint64_t seed, const std::string& out_path,
                 unsigned jobs, const std::string& format);

// Runs one reproduction target and prints its verdict line.
int cmd_reproduce(const std::string& target, const std::string& out_dir,
                  const std::string& config_path, std::uint64_t seed, unsigned jobs,
                  const std::string& format);

// argv front end; maps exceptions to the exit codes above.
int run_cli(int argc, char** argv);

} // namespace optomech::cli

#endif
