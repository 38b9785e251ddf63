#ifndef OPTOMECH_SCENARIOS_HPP
#define OPTOMECH_SCENARIOS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "optomech/analysis.hpp"
#include "optomech/config.hpp"
#include "optomech/synth.hpp"

namespace optomech {

// Reproduction pipelines behind `reproduce <target>`. Each runs
// synthesize -> analyze -> compare-to-anchor and returns a verdict with the
// measured values, the expected window, and the list of files written.
const std::vector<std::string>& reproduce_targets();

// The five budget source names, in export column order.
const std::vector<std::string>& noise_source_names();

// One-sided force PSD of a single budget source (or "total") at the
// configured operating point, following the same per-frequency shot-ratio
// convention as build_budget. Throws std::invalid_argument on a bad name.
PsdCurve source_psd_curve(const ExperimentConfig& cfg, const std::string& source);

// One synthetic realization of the power-dependence measurement: per-power
// spectra from the budget, the bin ASD at the probe frequency, and the
// quadratic decomposition, next to the generating coefficients.
struct Fig4aTrial {
  std::vector<PowerPointSample> points;
  std::vector<double> model_asd;   // budget total ASD at each power
  FitResult fit;
  double c0_true = 0.0;            // one-sided generating coefficients
  double c1_true = 0.0;
  double c2_true = 0.0;

  bool within(double n_sigma) const;
};

Fig4aTrial run_fig4a_trial(const ExperimentConfig& cfg, std::uint64_t seed);

// Runs the named target. Data files land in out_dir (which must exist)
// unless out_dir is empty; format selects csv or json for time-series data.
// The returned verdict carries "pass" plus target-specific measurements.
nlohmann::json run_reproduce_target(const ExperimentConfig& cfg, const std::string& target,
                                    std::uint64_t seed, unsigned jobs,
                                    const std::string& out_dir, const std::string& format);

} // namespace optomech

#endif
