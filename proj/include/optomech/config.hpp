#ifndef OPTOMECH_CONFIG_HPP
#define OPTOMECH_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "optomech/dynamics.hpp"
#include "optomech/model.hpp"

namespace optomech {

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Per-frequency relative intensity noise amplitude table. Lookup is log-log
// linear between entries and clamped outside them.
struct RinTable {
  std::vector<std::pair<double, double>> entries;  // (frequency Hz, A 1/sqrt(Hz))
  double at(double f_hz) const;
};

// Measurement-loop block values. The servo is a single integrator; the PDH
// discriminant and photodetector gains are flat; the feedback actuates a
// second, heavier suspended mirror whose susceptibility closes the loop.
struct LoopConfig {
  double pdh_volts_per_m = 1.0e7;
  double pd_gain = 1.0;
  double servo_unity_gain_hz = 0.0;
  double act_newtons_per_volt = 2.1e-5;
  double controlled_mass_kg = 0.1;
  double controlled_f0_hz = 1.0;
  double controlled_q = 100.0;
  DampingModel controlled_damping = DampingModel::viscous;
};

struct BudgetConfig {
  bool exact_occupation = true;
  double ratio_frequency_hz = 325.0;
};

struct SensingConfig {
  double anchor_asd = 0.0;   // single-sided force ASD, N/sqrt(Hz), at anchor_hz
  double anchor_hz = 75.0;
};

// Reproduction scenario knobs. Values that override the top-level physics
// apply only within their scenario.
struct Ratio325Scenario {
  double circulating_power_w = 4.1;
  double detuning_over_kappa = 0.0;
  double ratio_min = 1.0;
  double ratio_max = 2.0;
};

struct OpticalSpringScenario {
  double input_power_w = 7.6e-3;
  double detuning_over_kappa = 1.1;
  double f_eff_min_hz = 200.0;
  double f_eff_max_hz = 600.0;
  double sweep_min = 0.01;
  double sweep_max = 3.0;
  std::size_t sweep_points = 300;
};

struct LinewidthScenario {
  double sweep_rate_hz_per_s = 1.0e10;
  double sample_rate_hz = 2.0e7;
  double noise_rms = 0.01;
  double span_half_widths = 10.0;
  double kappa_rel_tol = 0.005;
};

struct RingdownScenario {
  double sample_rate_hz = 142.6;
  double duration_s = 2000.0;
  double amplitude = 1.0;
  double noise_rms = 0.02;
  double lowpass_bw_hz = 0.0;  // 0 selects the default 0.1*omega_m/2pi
  double q_rel_tol = 0.02;
};

struct Fig3aScenario {
  double input_power_w = 7.6e-3;
  double detuning_over_kappa = 1.1;
  double sensing_anchor_asd = 1.0e-15;  // illustrative readout floor for the figure
  double sample_rate_hz = 2048.0;
  double duration_s = 64.0;
  double segment_duration_s = 0.5;
  double peak_tolerance_hz = 6.0;
};

struct Fig4aScenario {
  std::vector<double> powers_w = {0.37e-3, 1.5e-3, 4.8e-3, 7.6e-3};
  double frequency_hz = 325.0;
  double sample_rate_hz = 1280.0;
  double segment_duration_s = 0.4;
  std::size_t n_segments = 400;
  double coverage_n_sigma = 2.0;
};

struct Fig4dScenario {
  std::vector<double> powers_w = {0.05e-3, 0.2e-3, 0.8e-3, 3.0e-3, 10.0e-3};
  double band_lo_hz = 30.0;
  double band_hi_hz = 100.0;
  double sample_rate_hz = 512.0;
  double duration_s = 400.0;
  double segment_duration_s = 2.0;
  double sensing_anchor_asd = 1.5e-16;   // at the reference power below
  double sensing_reference_power_w = 7.6e-3;
  double slope_first_min = 0.5;
  double slope_last_max = -0.2;
};

struct SimulateConfig {
  double sample_rate_hz = 4096.0;
  std::size_t max_samples = std::size_t(1) << 26;  // documented memory cap
};

struct ExperimentConfig {
  CavityParams cavity;
  MechanicalParams mech;
  LaserParams laser;
  RinTable rin;
  SensingConfig sensing;
  LoopConfig loop;
  BudgetConfig budget;
  double delta_phi = 0.0;                 // rad/sqrt(Hz)
  double shot_reference_power_w = 0.0;    // 0 means "use laser input power"
  SimulateConfig simulate;
  Ratio325Scenario ratio325;
  OpticalSpringScenario optical_spring_scn;
  LinewidthScenario linewidth;
  RingdownScenario ringdown;
  Fig3aScenario fig3a;
  Fig4aScenario fig4a;
  Fig4dScenario fig4d;
  nlohmann::json raw;                     // parsed file, kept for manifests

  // Laser parameters with the RIN amplitude taken from the table at f_hz.
  LaserParams laser_at(double f_hz) const;
  // Loop blocks assembled from LoopConfig plus the pendulum and the optical
  // spring at the configured operating point.
  LoopModel build_loop(double n_circ) const;
};

// Parses the JSON configuration (// comments allowed). Frequencies are given
// in Hz in the file and converted to rad/s where the model wants them.
// Throws config_error with the offending key path on any problem.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const nlohmann::json& j);

// Built-in defaults mirroring the reference configuration file.
ExperimentConfig default_config();

// Full serialization of the resolved configuration, using the same keys and
// units as the parser, so parse_config(config_to_json(c)) reproduces c.
// Embedded in run manifests to make every output auditable.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

} // namespace optomech

#endif
