#include "optomech/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "optomech/config.hpp"
#include "optomech/io.hpp"
#include "optomech/noisebudget.hpp"
#include "optomech/rng.hpp"
#include "optomech/scenarios.hpp"
#include "optomech/synth.hpp"
#include "optomech/version.hpp"

namespace optomech::cli {

namespace {

std::string iso_utc_now() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

ExperimentConfig load_or_default(const std::string& config_path) {
  return config_path.empty() ? default_config() : load_config(config_path);
}

// "lo:hi:n" -> n log-spaced points over [lo, hi] Hz.
std::vector<double> parse_grid(const std::string& spec) {
  double lo = 0.0, hi = 0.0;
  unsigned long n = 0;
  char extra = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lu%c", &lo, &hi, &n, &extra) != 3 ||
      !(lo > 0.0) || !(hi > lo) || n < 2) {
    throw std::invalid_argument("grid spec must be lo:hi:n with 0 < lo < hi (Hz) and n >= 2, "
                                "got '" + spec + "'");
  }
  std::vector<double> g(n);
  for (unsigned long i = 0; i < n; ++i) {
    g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
  }
  return g;
}

std::vector<std::string> split_sources(const std::string& selection) {
  std::vector<std::string> out;
  std::stringstream ss(selection);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(item.substr(b, e - b + 1));
  }
  if (out.empty()) throw std::invalid_argument("empty source selection");
  if (out.size() == 1 && out[0] == "all") return noise_source_names();
  for (const auto& s : out) {
    source_psd_curve(default_config(), s);  // name check only; throws on bad names
  }
  return out;
}

RunManifest make_manifest(const std::string& command, nlohmann::json arguments,
                          const ExperimentConfig& cfg, std::uint64_t seed, unsigned jobs,
                          const std::string& format) {
  RunManifest m;
  m.command = command;
  m.arguments = std::move(arguments);
  m.config = config_to_json(cfg);
  m.seed = seed;
  m.jobs = jobs;
  m.format = format;
  m.version = k_version;
  m.timestamp_utc = iso_utc_now();
  return m;
}

void write_manifest(const std::string& out_dir, const RunManifest& m) {
  io::write_json(join(out_dir, "manifest.json"), m.to_json());
}

} // namespace

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["arguments"] = arguments;
  j["config"] = config;
  j["seed"] = seed;
  j["jobs"] = jobs;
  j["format"] = format;
  j["outputs"] = outputs;
  j["version"] = version;
  j["timestamp_utc"] = timestamp_utc;
  return j;
}

int cmd_budget(const std::string& config_path, const std::string& grid_spec,
               const std::string& out_path, std::uint64_t seed, unsigned jobs,
               const std::string& format) {
  const ExperimentConfig cfg = load_or_default(config_path);
  const std::vector<double> grid = parse_grid(grid_spec);
  const NoiseBudget budget = build_budget(cfg, grid);

  std::filesystem::create_directories(out_path);
  RunManifest m = make_manifest("budget", {{"grid", grid_spec}}, cfg, seed, jobs, format);
  io::write_budget_csv(join(out_path, "budget.csv"), budget);
  m.outputs.push_back("budget.csv");
  io::write_json(join(out_path, "budget.json"), io::budget_to_json(budget));
  m.outputs.push_back("budget.json");
  write_manifest(out_path, m);

  const double f0 = cfg.budget.ratio_frequency_hz;
  std::cout << "ratio_at(" << io::format_double(f0)
            << " Hz) = " << io::format_double(budget.ratio_at(f0)) << "\n";
  return k_exit_ok;
}

int cmd_simulate(const std::string& config_path, const std::string& source_selection,
                 double duration_s, std::uint64_t seed, const std::string& out_path,
                 unsigned jobs, const std::string& format) {
  const ExperimentConfig cfg = load_or_default(config_path);
  const std::vector<std::string> sources = split_sources(source_selection);
  if (!(duration_s > 0.0)) {
    throw std::invalid_argument("duration must be positive seconds");
  }
  const double fs = cfg.simulate.sample_rate_hz;
  const double n_req = duration_s * fs;
  if (n_req > static_cast<double>(cfg.simulate.max_samples)) {
    throw std::invalid_argument(
        "requested " + std::to_string(static_cast<std::uint64_t>(n_req)) +
        " samples exceeds simulate.max_samples = " + std::to_string(cfg.simulate.max_samples) +
        "; shorten the record or raise the cap in the configuration");
  }

  // Each source gets its own named substream, so any single-source run is
  // bit-identical to that source's contribution in a combined run.
  TimeSeries total;
  std::string names;
  for (const auto& s : sources) {
    const TimeSeries ts =
        colored_noise(source_psd_curve(cfg, s), fs, duration_s,
                      SplitMix64::mix(seed, SplitMix64::stream_index(s)),
                      std::size_t(1) << 20, jobs);
    if (total.samples.empty()) {
      total = ts;
    } else {
      for (std::size_t i = 0; i < total.samples.size(); ++i) {
        total.samples[i] += ts.samples[i];
      }
    }
    if (!names.empty()) names += "+";
    names += s;
  }
  total.seed = seed;
  total.provenance = "simulate(sources=" + names + "," + total.provenance + ")";

  std::filesystem::create_directories(out_path);
  RunManifest m = make_manifest(
      "simulate", {{"sources", sources}, {"duration_s", duration_s}}, cfg, seed, jobs, format);
  const std::string name = std::string("timeseries.") + (format == "json" ? "json" : "csv");
  if (format == "json") {
    io::write_timeseries_json(join(out_path, name), total);
  } else {
    io::write_timeseries_csv(join(out_path, name), total);
  }
  m.outputs.push_back(name);
  write_manifest(out_path, m);

  std::cout << "simulate: " << total.samples.size() << " samples of " << names << " at "
            << io::format_double(fs) << " Hz -> " << join(out_path, name) << "\n";
  return k_exit_ok;
}

int cmd_reproduce(const std::string& target, const std::string& out_dir,
                  const std::string& config_path, std::uint64_t seed, unsigned jobs,
                  const std::string& format) {
  const ExperimentConfig cfg = load_or_default(config_path);
  nlohmann::json verdict = run_reproduce_target(cfg, target, seed, jobs, out_dir, format);

  RunManifest m = make_manifest("reproduce", {{"target", target}}, cfg, seed, jobs, format);
  m.outputs = verdict["outputs"].get<std::vector<std::string>>();
  write_manifest(out_dir, m);

  const bool pass = verdict["pass"].get<bool>();
  std::cout << (pass ? "[PASS] " : "[FAIL] ") << "reproduce " << target << ": "
            << verdict["measured"].dump() << "\n";
  return pass ? k_exit_ok : k_exit_verdict_fail;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Suspended-mirror optomechanics: noise budget, synthetic data, "
               "reproduction pipelines"};
  app.fallthrough();
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string format = "csv";
  std::uint64_t seed = 12345;
  unsigned jobs = 1;
  app.add_option("--config", config_path, "JSON configuration file (built-in defaults if omitted)");
  app.add_option("--seed", seed, "base seed for all noise synthesis");
  app.add_option("--jobs", jobs, "worker threads for block synthesis");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--format", format, "time-series file format")
      ->check(CLI::IsMember({"csv", "json"}));

  auto* budget = app.add_subcommand("budget", "force noise budget over a frequency grid");
  std::string grid_spec = "10:2000:241";
  budget->add_option("--grid", grid_spec, "log frequency grid lo:hi:n in Hz");

  auto* simulate = app.add_subcommand("simulate", "synthesize force noise time series");
  std::string sources = "all";
  double duration_s = 8.0;
  simulate->add_option("--sources", sources,
                       "comma list of qba,classical,thermal,sensing,phase or all");
  simulate->add_option("--duration", duration_s, "record length in seconds");

  auto* reproduce = app.add_subcommand("reproduce", "run a reproduction pipeline");
  std::string target;
  std::string targets_help = "one of:";
  for (const auto& t : reproduce_targets()) targets_help += " " + t;
  reproduce->add_option("target", target, targets_help)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? k_exit_ok : k_exit_usage;
  }

  try {
    if (budget->parsed()) {
      return cmd_budget(config_path, grid_spec, out_dir, seed, jobs, format);
    }
    if (simulate->parsed()) {
      return cmd_simulate(config_path, sources, duration_s, seed, out_dir, jobs, format);
    }
    return cmd_reproduce(target, out_dir, config_path, seed, jobs, format);
  } catch (const config_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return k_exit_usage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return k_exit_usage;
  } catch (const std::domain_error& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return k_exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return k_exit_internal;
  }
}

} // namespace optomech::cli
