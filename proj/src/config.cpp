#include "optomech/config.hpp"

#include <cmath>
#include <fstream>

#include "optomech/constants.hpp"

namespace optomech {

using nlohmann::json;

double RinTable::at(double f_hz) const {
  if (entries.empty()) return 0.0;
  if (!(f_hz > 0.0)) throw std::domain_error("RinTable::at: frequency must be > 0");
  if (f_hz <= entries.front().first) return entries.front().second;
  if (f_hz >= entries.back().first) return entries.back().second;
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (f_hz <= entries[i].first) {
      const auto& [f0, a0] = entries[i - 1];
      const auto& [f1, a1] = entries[i];
      const double t = (std::log(f_hz) - std::log(f0)) / (std::log(f1) - std::log(f0));
      return std::exp((1.0 - t) * std::log(a0) + t * std::log(a1));
    }
  }
  return entries.back().second;
}

namespace {

double get_num(const json& j, const std::string& path, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) {
    throw config_error("config key '" + path + "." + key + "' must be a number");
  }
  return v.get<double>();
}

bool get_bool(const json& j, const std::string& path, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean()) {
    throw config_error("config key '" + path + "." + key + "' must be a boolean");
  }
  return v.get<bool>();
}

std::string get_str(const json& j, const std::string& path, const char* key,
                    const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) {
    throw config_error("config key '" + path + "." + key + "' must be a string");
  }
  return v.get<std::string>();
}

std::vector<double> get_num_list(const json& j, const std::string& path, const char* key,
                                 std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array()) {
    throw config_error("config key '" + path + "." + key + "' must be an array of numbers");
  }
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) {
      throw config_error("config key '" + path + "." + key + "' must contain only numbers");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

const json& get_obj(const json& j, const char* key) {
  static const json empty = json::object();
  if (!j.contains(key)) return empty;
  return j.at(key);
}

void parse_cavity(const json& j, CavityParams& c) {
  const std::string path = "cavity";
  const double kappa_hz = get_num(j, path, "kappa_hz", c.kappa / k_two_pi);
  c.kappa = k_two_pi * kappa_hz;
  const double kin_hz = get_num(j, path, "kappa_in_hz", kappa_hz / 2.0);
  c.kappa_in = k_two_pi * kin_hz;
  c.detuning = k_two_pi * get_num(j, path, "detuning_hz", c.detuning / k_two_pi);
  c.wavelength = get_num(j, path, "wavelength_m", c.wavelength);
  c.round_trip_length = get_num(j, path, "round_trip_length_m", c.round_trip_length);
  if (j.contains("coupling_g_rad_per_s_m")) {
    c.coupling_g = get_num(j, path, "coupling_g_rad_per_s_m", 0.0);
  } else {
    const double coef = get_num(j, path, "coupling_pull_coefficient", 2.8);
    const double omega_c = k_two_pi * k_speed_of_light / c.wavelength;
    c.coupling_g = k_two_pi * omega_c * coef;
  }
  c.incident_angle_beta = get_num(j, path, "incident_angle_beta_rad", c.incident_angle_beta);
  c.k_t_opt = get_num(j, path, "k_t_opt_nm_per_rad", c.k_t_opt);
  c.geometry = cavity_geometry_from_string(
      get_str(j, path, "geometry", to_string(c.geometry)));
}

void parse_mechanics(const json& j, MechanicalParams& m) {
  const std::string path = "mechanics";
  m.mirror_mass = get_num(j, path, "mirror_mass_kg", m.mirror_mass);
  m.wire_length = get_num(j, path, "wire_length_m", m.wire_length);
  m.wire_radius = get_num(j, path, "wire_radius_m", m.wire_radius);
  m.wire_youngs_modulus = get_num(j, path, "wire_youngs_modulus_pa", m.wire_youngs_modulus);
  m.wire_shear_modulus = get_num(j, path, "wire_shear_modulus_pa", m.wire_shear_modulus);
  m.wire_density = get_num(j, path, "wire_density_kg_m3", m.wire_density);
  m.quality_factor = get_num(j, path, "quality_factor", m.quality_factor);
  m.temperature = get_num(j, path, "temperature_k", m.temperature);
  m.damping_model =
      damping_model_from_string(get_str(j, path, "damping_model", to_string(m.damping_model)));
}

void parse_laser(const json& j, ExperimentConfig& cfg) {
  const std::string path = "laser";
  cfg.laser.input_power = get_num(j, path, "input_power_w", cfg.laser.input_power);
  cfg.laser.quantum_efficiency =
      get_num(j, path, "quantum_efficiency_a_per_w", cfg.laser.quantum_efficiency);
  cfg.delta_phi = get_num(j, path, "phase_noise_rad_per_rthz", cfg.delta_phi);
  cfg.laser.phase_noise = cfg.delta_phi;
  if (j.contains("rin_table")) {
    const json& t = j.at("rin_table");
    if (!t.is_array()) throw config_error("laser.rin_table must be an array of [Hz, A] pairs");
    cfg.rin.entries.clear();
    for (const auto& row : t) {
      if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number()) {
        throw config_error("laser.rin_table rows must be [frequency_hz, amplitude] pairs");
      }
      cfg.rin.entries.emplace_back(row[0].get<double>(), row[1].get<double>());
    }
    if (cfg.rin.entries.empty()) throw config_error("laser.rin_table must not be empty");
    for (std::size_t i = 1; i < cfg.rin.entries.size(); ++i) {
      if (cfg.rin.entries[i].first <= cfg.rin.entries[i - 1].first) {
        throw config_error("laser.rin_table frequencies (Hz) must be strictly increasing");
      }
    }
  }
}

void parse_loop(const json& j, LoopConfig& l) {
  const std::string path = "loop";
  l.pdh_volts_per_m = get_num(j, path, "pdh_volts_per_m", l.pdh_volts_per_m);
  l.pd_gain = get_num(j, path, "pd_gain", l.pd_gain);
  l.servo_unity_gain_hz = get_num(j, path, "servo_unity_gain_hz", l.servo_unity_gain_hz);
  l.act_newtons_per_volt =
      get_num(j, path, "actuator_newtons_per_volt", l.act_newtons_per_volt);
  const json& cm = get_obj(j, "controlled_mirror");
  const std::string cpath = "loop.controlled_mirror";
  l.controlled_mass_kg = get_num(cm, cpath, "mass_kg", l.controlled_mass_kg);
  l.controlled_f0_hz = get_num(cm, cpath, "resonance_hz", l.controlled_f0_hz);
  l.controlled_q = get_num(cm, cpath, "quality_factor", l.controlled_q);
  l.controlled_damping = damping_model_from_string(
      get_str(cm, cpath, "damping_model", to_string(l.controlled_damping)));
}

void parse_scenarios(const json& j, ExperimentConfig& cfg) {
  {
    const json& s = get_obj(j, "ratio325");
    const std::string p = "scenarios.ratio325";
    auto& r = cfg.ratio325;
    r.circulating_power_w = get_num(s, p, "circulating_power_w", r.circulating_power_w);
    r.detuning_over_kappa = get_num(s, p, "detuning_over_kappa", r.detuning_over_kappa);
    r.ratio_min = get_num(s, p, "ratio_min", r.ratio_min);
    r.ratio_max = get_num(s, p, "ratio_max", r.ratio_max);
  }
  {
    const json& s = get_obj(j, "optical_spring");
    const std::string p = "scenarios.optical_spring";
    auto& o = cfg.optical_spring_scn;
    o.input_power_w = get_num(s, p, "input_power_w", o.input_power_w);
    o.detuning_over_kappa = get_num(s, p, "detuning_over_kappa", o.detuning_over_kappa);
    o.f_eff_min_hz = get_num(s, p, "f_eff_min_hz", o.f_eff_min_hz);
    o.f_eff_max_hz = get_num(s, p, "f_eff_max_hz", o.f_eff_max_hz);
    o.sweep_min = get_num(s, p, "sweep_min", o.sweep_min);
    o.sweep_max = get_num(s, p, "sweep_max", o.sweep_max);
    o.sweep_points = static_cast<std::size_t>(
        get_num(s, p, "sweep_points", static_cast<double>(o.sweep_points)));
  }
  {
    const json& s = get_obj(j, "linewidth");
    const std::string p = "scenarios.linewidth";
    auto& l = cfg.linewidth;
    l.sweep_rate_hz_per_s = get_num(s, p, "sweep_rate_hz_per_s", l.sweep_rate_hz_per_s);
    l.sample_rate_hz = get_num(s, p, "sample_rate_hz", l.sample_rate_hz);
    l.noise_rms = get_num(s, p, "noise_rms", l.noise_rms);
    l.span_half_widths = get_num(s, p, "span_half_widths", l.span_half_widths);
    l.kappa_rel_tol = get_num(s, p, "kappa_rel_tol", l.kappa_rel_tol);
  }
  {
    const json& s = get_obj(j, "ringdown");
    const std::string p = "scenarios.ringdown";
    auto& r = cfg.ringdown;
    r.sample_rate_hz = get_num(s, p, "sample_rate_hz", r.sample_rate_hz);
    r.duration_s = get_num(s, p, "duration_s", r.duration_s);
    r.amplitude = get_num(s, p, "amplitude", r.amplitude);
    r.noise_rms = get_num(s, p, "noise_rms", r.noise_rms);
    r.lowpass_bw_hz = get_num(s, p, "lowpass_bw_hz", r.lowpass_bw_hz);
    r.q_rel_tol = get_num(s, p, "q_rel_tol", r.q_rel_tol);
  }
  {
    const json& s = get_obj(j, "fig3a");
    const std::string p = "scenarios.fig3a";
    auto& f = cfg.fig3a;
    f.input_power_w = get_num(s, p, "input_power_w", f.input_power_w);
    f.detuning_over_kappa = get_num(s, p, "detuning_over_kappa", f.detuning_over_kappa);
    f.sensing_anchor_asd = get_num(s, p, "sensing_anchor_asd_n_per_rthz", f.sensing_anchor_asd);
    f.sample_rate_hz = get_num(s, p, "sample_rate_hz", f.sample_rate_hz);
    f.duration_s = get_num(s, p, "duration_s", f.duration_s);
    f.segment_duration_s = get_num(s, p, "segment_duration_s", f.segment_duration_s);
    f.peak_tolerance_hz = get_num(s, p, "peak_tolerance_hz", f.peak_tolerance_hz);
  }
  {
    const json& s = get_obj(j, "fig4a");
    const std::string p = "scenarios.fig4a";
    auto& f = cfg.fig4a;
    f.powers_w = get_num_list(s, p, "powers_w", f.powers_w);
    f.frequency_hz = get_num(s, p, "frequency_hz", f.frequency_hz);
    f.sample_rate_hz = get_num(s, p, "sample_rate_hz", f.sample_rate_hz);
    f.segment_duration_s = get_num(s, p, "segment_duration_s", f.segment_duration_s);
    f.n_segments = static_cast<std::size_t>(
        get_num(s, p, "n_segments", static_cast<double>(f.n_segments)));
    f.coverage_n_sigma = get_num(s, p, "coverage_n_sigma", f.coverage_n_sigma);
  }
  {
    const json& s = get_obj(j, "fig4d");
    const std::string p = "scenarios.fig4d";
    auto& f = cfg.fig4d;
    f.powers_w = get_num_list(s, p, "powers_w", f.powers_w);
    f.band_lo_hz = get_num(s, p, "band_lo_hz", f.band_lo_hz);
    f.band_hi_hz = get_num(s, p, "band_hi_hz", f.band_hi_hz);
    f.sample_rate_hz = get_num(s, p, "sample_rate_hz", f.sample_rate_hz);
    f.duration_s = get_num(s, p, "duration_s", f.duration_s);
    f.segment_duration_s = get_num(s, p, "segment_duration_s", f.segment_duration_s);
    f.sensing_anchor_asd = get_num(s, p, "sensing_anchor_asd_n_per_rthz", f.sensing_anchor_asd);
    f.sensing_reference_power_w =
        get_num(s, p, "sensing_reference_power_w", f.sensing_reference_power_w);
    f.slope_first_min = get_num(s, p, "slope_first_min", f.slope_first_min);
    f.slope_last_max = get_num(s, p, "slope_last_max", f.slope_last_max);
  }
}

} // namespace

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.cavity.kappa = k_two_pi * 1.181e6;
  cfg.cavity.kappa_in = cfg.cavity.kappa / 2.0;
  cfg.cavity.detuning = 0.0;
  cfg.cavity.wavelength = 1.064e-6;
  cfg.cavity.round_trip_length = 0.1;
  const double omega_c = k_two_pi * k_speed_of_light / cfg.cavity.wavelength;
  cfg.cavity.coupling_g = k_two_pi * omega_c * 2.8;
  cfg.cavity.incident_angle_beta = 0.75;
  cfg.cavity.k_t_opt = 1.2e-9;
  cfg.cavity.geometry = CavityGeometry::triangular;

  cfg.mech.mirror_mass = 5.0e-6;
  cfg.mech.wire_length = 0.05;
  cfg.mech.wire_radius = 1.5e-6;
  cfg.mech.wire_youngs_modulus = 411.0e9;
  cfg.mech.wire_shear_modulus = 161.0e9;
  cfg.mech.wire_density = 19300.0;
  cfg.mech.quality_factor = 3.2e5;
  cfg.mech.temperature = 300.0;
  cfg.mech.damping_model = DampingModel::structure;

  cfg.laser.input_power = 7.6e-3;
  cfg.laser.quantum_efficiency = 0.73;
  cfg.delta_phi = 2.5776e-2;
  cfg.laser.phase_noise = cfg.delta_phi;
  cfg.rin.entries = {{75.0, 3.5e-7}, {325.0, 1.8e-7}};
  cfg.laser.rin_amplitude = cfg.rin.at(325.0);

  cfg.sensing.anchor_asd = 2.0e-17;
  cfg.sensing.anchor_hz = 75.0;

  cfg.loop.servo_unity_gain_hz = 1.3e7;

  cfg.shot_reference_power_w = 3.166e-2;
  return cfg;
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg = default_config();
  cfg.raw = j;
  try {
    parse_cavity(get_obj(j, "cavity"), cfg.cavity);
    parse_mechanics(get_obj(j, "mechanics"), cfg.mech);
    parse_laser(get_obj(j, "laser"), cfg);
    {
      const json& s = get_obj(j, "sensing");
      cfg.sensing.anchor_asd =
          get_num(s, "sensing", "force_asd_anchor_n_per_rthz", cfg.sensing.anchor_asd);
      cfg.sensing.anchor_hz = get_num(s, "sensing", "anchor_frequency_hz", cfg.sensing.anchor_hz);
    }
    parse_loop(get_obj(j, "loop"), cfg.loop);
    {
      const json& b = get_obj(j, "budget");
      cfg.budget.exact_occupation = get_bool(b, "budget", "exact_occupation", true);
      cfg.budget.ratio_frequency_hz =
          get_num(b, "budget", "ratio_frequency_hz", cfg.budget.ratio_frequency_hz);
    }
    cfg.shot_reference_power_w =
        get_num(j, "", "shot_reference_power_w", cfg.shot_reference_power_w);
    {
      const json& s = get_obj(j, "simulate");
      cfg.simulate.sample_rate_hz =
          get_num(s, "simulate", "sample_rate_hz", cfg.simulate.sample_rate_hz);
      cfg.simulate.max_samples = static_cast<std::size_t>(get_num(
          s, "simulate", "max_samples", static_cast<double>(cfg.simulate.max_samples)));
    }
    parse_scenarios(get_obj(j, "scenarios"), cfg);
  } catch (const json::exception& e) {
    throw config_error(std::string("config parse failure: ") + e.what());
  }

  cfg.laser.rin_amplitude = cfg.rin.at(cfg.budget.ratio_frequency_hz);
  try {
    cfg.cavity.validate();
    cfg.mech.validate();
    cfg.laser.validate();
  } catch (const std::domain_error& e) {
    throw config_error(std::string("config validation failure: ") + e.what() +
                       " (check the corresponding *_hz / *_m / *_kg key)");
  }
  if (cfg.sensing.anchor_asd < 0.0 || !(cfg.sensing.anchor_hz > 0.0)) {
    throw config_error("sensing anchor must have non-negative ASD and positive frequency");
  }
  if (cfg.delta_phi < 0.0) {
    throw config_error("laser.phase_noise_rad_per_rthz must be >= 0");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, true);  // allow // comments
  } catch (const json::exception& e) {
    throw config_error("config file " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["cavity"] = {{"kappa_hz", cfg.cavity.kappa / k_two_pi},
                 {"kappa_in_hz", cfg.cavity.kappa_in / k_two_pi},
                 {"detuning_hz", cfg.cavity.detuning / k_two_pi},
                 {"wavelength_m", cfg.cavity.wavelength},
                 {"round_trip_length_m", cfg.cavity.round_trip_length},
                 {"coupling_g_rad_per_s_m", cfg.cavity.coupling_g},
                 {"incident_angle_beta_rad", cfg.cavity.incident_angle_beta},
                 {"k_t_opt_nm_per_rad", cfg.cavity.k_t_opt},
                 {"geometry", to_string(cfg.cavity.geometry)}};
  j["mechanics"] = {{"mirror_mass_kg", cfg.mech.mirror_mass},
                    {"wire_length_m", cfg.mech.wire_length},
                    {"wire_radius_m", cfg.mech.wire_radius},
                    {"wire_youngs_modulus_pa", cfg.mech.wire_youngs_modulus},
                    {"wire_shear_modulus_pa", cfg.mech.wire_shear_modulus},
                    {"wire_density_kg_m3", cfg.mech.wire_density},
                    {"quality_factor", cfg.mech.quality_factor},
                    {"temperature_k", cfg.mech.temperature},
                    {"damping_model", to_string(cfg.mech.damping_model)}};
  json rin = json::array();
  for (const auto& [f, a] : cfg.rin.entries) rin.push_back({f, a});
  j["laser"] = {{"input_power_w", cfg.laser.input_power},
                {"quantum_efficiency_a_per_w", cfg.laser.quantum_efficiency},
                {"phase_noise_rad_per_rthz", cfg.delta_phi},
                {"rin_table", std::move(rin)}};
  j["sensing"] = {{"force_asd_anchor_n_per_rthz", cfg.sensing.anchor_asd},
                  {"anchor_frequency_hz", cfg.sensing.anchor_hz}};
  j["loop"] = {{"pdh_volts_per_m", cfg.loop.pdh_volts_per_m},
               {"pd_gain", cfg.loop.pd_gain},
               {"servo_unity_gain_hz", cfg.loop.servo_unity_gain_hz},
               {"actuator_newtons_per_volt", cfg.loop.act_newtons_per_volt},
               {"controlled_mirror",
                {{"mass_kg", cfg.loop.controlled_mass_kg},
                 {"resonance_hz", cfg.loop.controlled_f0_hz},
                 {"quality_factor", cfg.loop.controlled_q},
                 {"damping_model", to_string(cfg.loop.controlled_damping)}}}};
  j["budget"] = {{"exact_occupation", cfg.budget.exact_occupation},
                 {"ratio_frequency_hz", cfg.budget.ratio_frequency_hz}};
  j["shot_reference_power_w"] = cfg.shot_reference_power_w;
  j["simulate"] = {{"sample_rate_hz", cfg.simulate.sample_rate_hz},
                   {"max_samples", static_cast<double>(cfg.simulate.max_samples)}};
  j["scenarios"] = {
      {"ratio325",
       {{"circulating_power_w", cfg.ratio325.circulating_power_w},
        {"detuning_over_kappa", cfg.ratio325.detuning_over_kappa},
        {"ratio_min", cfg.ratio325.ratio_min},
        {"ratio_max", cfg.ratio325.ratio_max}}},
      {"optical_spring",
       {{"input_power_w", cfg.optical_spring_scn.input_power_w},
        {"detuning_over_kappa", cfg.optical_spring_scn.detuning_over_kappa},
        {"f_eff_min_hz", cfg.optical_spring_scn.f_eff_min_hz},
        {"f_eff_max_hz", cfg.optical_spring_scn.f_eff_max_hz},
        {"sweep_min", cfg.optical_spring_scn.sweep_min},
        {"sweep_max", cfg.optical_spring_scn.sweep_max},
        {"sweep_points", static_cast<double>(cfg.optical_spring_scn.sweep_points)}}},
      {"linewidth",
       {{"sweep_rate_hz_per_s", cfg.linewidth.sweep_rate_hz_per_s},
        {"sample_rate_hz", cfg.linewidth.sample_rate_hz},
        {"noise_rms", cfg.linewidth.noise_rms},
        {"span_half_widths", cfg.linewidth.span_half_widths},
        {"kappa_rel_tol", cfg.linewidth.kappa_rel_tol}}},
      {"ringdown",
       {{"sample_rate_hz", cfg.ringdown.sample_rate_hz},
        {"duration_s", cfg.ringdown.duration_s},
        {"amplitude", cfg.ringdown.amplitude},
        {"noise_rms", cfg.ringdown.noise_rms},
        {"lowpass_bw_hz", cfg.ringdown.lowpass_bw_hz},
        {"q_rel_tol", cfg.ringdown.q_rel_tol}}},
      {"fig3a",
       {{"input_power_w", cfg.fig3a.input_power_w},
        {"detuning_over_kappa", cfg.fig3a.detuning_over_kappa},
        {"sensing_anchor_asd_n_per_rthz", cfg.fig3a.sensing_anchor_asd},
        {"sample_rate_hz", cfg.fig3a.sample_rate_hz},
        {"duration_s", cfg.fig3a.duration_s},
        {"segment_duration_s", cfg.fig3a.segment_duration_s},
        {"peak_tolerance_hz", cfg.fig3a.peak_tolerance_hz}}},
      {"fig4a",
       {{"powers_w", cfg.fig4a.powers_w},
        {"frequency_hz", cfg.fig4a.frequency_hz},
        {"sample_rate_hz", cfg.fig4a.sample_rate_hz},
        {"segment_duration_s", cfg.fig4a.segment_duration_s},
        {"n_segments", static_cast<double>(cfg.fig4a.n_segments)},
        {"coverage_n_sigma", cfg.fig4a.coverage_n_sigma}}},
      {"fig4d",
       {{"powers_w", cfg.fig4d.powers_w},
        {"band_lo_hz", cfg.fig4d.band_lo_hz},
        {"band_hi_hz", cfg.fig4d.band_hi_hz},
        {"sample_rate_hz", cfg.fig4d.sample_rate_hz},
        {"duration_s", cfg.fig4d.duration_s},
        {"segment_duration_s", cfg.fig4d.segment_duration_s},
        {"sensing_anchor_asd_n_per_rthz", cfg.fig4d.sensing_anchor_asd},
        {"sensing_reference_power_w", cfg.fig4d.sensing_reference_power_w},
        {"slope_first_min", cfg.fig4d.slope_first_min},
        {"slope_last_max", cfg.fig4d.slope_last_max}}}};
  return j;
}

LaserParams ExperimentConfig::laser_at(double f_hz) const {
  LaserParams out = laser;
  out.rin_amplitude = rin.at(f_hz);
  return out;
}

LoopModel ExperimentConfig::build_loop(double n_circ) const {
  const PendulumMode pend = pendulum_mode(mech);
  const OpticalSpring spring = optical_spring(cavity, mech, n_circ);

  LoopModel lm;
  lm.h_pend = susceptibility_response(mech.mirror_mass, pend.omega_m, mech.quality_factor,
                                      mech.damping_model);
  lm.h_c = susceptibility_response(loop.controlled_mass_kg, k_two_pi * loop.controlled_f0_hz,
                                   loop.controlled_q, loop.controlled_damping);
  lm.h_opt = FrequencyResponse::flat(cplx(-spring.k_opt, 0.0), "m", "N");
  lm.h_pdh = FrequencyResponse::flat(cplx(loop.pdh_volts_per_m, 0.0), "m", "V");
  lm.h_pd = FrequencyResponse::flat(cplx(loop.pd_gain, 0.0), "V", "V");
  if (loop.servo_unity_gain_hz > 0.0) {
    lm.h_servo = FrequencyResponse::integrator(k_two_pi * loop.servo_unity_gain_hz, "V", "V");
  } else {
    lm.h_servo = FrequencyResponse::flat(cplx(0.0, 0.0), "V", "V");
  }
  lm.h_act = FrequencyResponse::flat(cplx(loop.act_newtons_per_volt, 0.0), "V", "N");

  // Sensing noise as displacement at the PDH input: the force-referred anchor
  // divided back through the pendulum susceptibility.
  const double anchor = sensing.anchor_asd;
  const double anchor_hz = sensing.anchor_hz;
  const MechanicalParams mech_copy = mech;
  lm.n_s_psd = [anchor, anchor_hz, mech_copy](double omega) {
    const double f = omega / k_two_pi;
    const double s_force_ds = 0.5 * anchor * anchor * (f / anchor_hz) * (f / anchor_hz);
    const cplx chi = mech_susceptibility(mech_copy, omega);
    return s_force_ds * std::norm(chi);
  };
  return lm;
}

} // namespace optomech
