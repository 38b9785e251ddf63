// Acceptance gate: exercises the eight release criteria end to end and
// prints one [PASS]/[FAIL] line per criterion with the measured values.
// Windows, tolerances, and trial counts come from the "acceptance" block of
// the reference configuration (argv[1]), so every verdict is auditable
// against the checked-in file. Exit status is nonzero when any criterion
// fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "optomech/analysis.hpp"
#include "optomech/config.hpp"
#include "optomech/constants.hpp"
#include "optomech/dynamics.hpp"
#include "optomech/model.hpp"
#include "optomech/noisebudget.hpp"
#include "optomech/rng.hpp"
#include "optomech/scenarios.hpp"
#include "optomech/synth.hpp"

namespace {

using namespace optomech;
namespace fs = std::filesystem;
using nlohmann::json;
using clock_type = std::chrono::steady_clock;

constexpr std::uint64_t k_gate_seed = 20260814ULL;

std::uint64_t sub_seed(const char* name) {
  return SplitMix64::mix(k_gate_seed, SplitMix64::stream_index(name));
}

struct Gate {
  int failures = 0;

  // body returns (pass, detail); the elapsed time is appended and checked
  // against the criterion's runtime budget.
  void run(int n, double limit_s, const std::function<std::pair<bool, std::string>()>& body) {
    const auto t0 = clock_type::now();
    bool pass = false;
    std::string detail;
    try {
      std::tie(pass, detail) = body();
    } catch (const std::exception& e) {
      pass = false;
      detail = std::string("exception: ") + e.what();
    }
    const double elapsed = std::chrono::duration<double>(clock_type::now() - t0).count();
    if (elapsed >= limit_s) pass = false;
    std::ostringstream line;
    line.precision(6);
    line << detail << " [" << elapsed << " s, limit " << limit_s << " s]";
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << n << ": " << line.str()
              << "\n";
    if (!pass) ++failures;
  }
};

LoopModel make_stub(cplx pend, cplx c, cplx opt, cplx pdh, cplx pd, cplx servo, cplx act) {
  LoopModel lm;
  lm.h_pend = FrequencyResponse::flat(pend, "N", "m");
  lm.h_c = FrequencyResponse::flat(c, "N", "m");
  lm.h_opt = FrequencyResponse::flat(opt, "m", "N");
  lm.h_pdh = FrequencyResponse::flat(pdh, "m", "V");
  lm.h_pd = FrequencyResponse::flat(pd, "V", "V");
  lm.h_servo = FrequencyResponse::flat(servo, "V", "V");
  lm.h_act = FrequencyResponse::flat(act, "V", "N");
  lm.n_s_psd = [](double) { return 0.0; };
  return lm;
}

cplx random_gain(SplitMix64& rng) {
  const double mag = std::pow(10.0, -3.0 + 6.0 * rng.next_double());
  return std::polar(mag, k_two_pi * rng.next_double());
}

double rel_dev(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

double band_mean_psd(const SpectralEstimate& est, double lo, double hi) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < est.grid_hz.size(); ++k) {
    if (est.grid_hz[k] < lo || est.grid_hz[k] > hi) continue;
    sum += est.psd[k];
    ++n;
  }
  return sum / static_cast<double>(n);
}

std::vector<fs::path> list_files(const fs::path& dir) {
  std::vector<fs::path> v;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) v.push_back(fs::relative(e.path(), dir));
  }
  std::sort(v.begin(), v.end());
  return v;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool dirs_identical(const fs::path& a, const fs::path& b, std::string& why) {
  const auto fa = list_files(a);
  const auto fb = list_files(b);
  if (fa != fb) {
    why = "file sets differ";
    return false;
  }
  for (const auto& rel : fa) {
    if (read_file(a / rel) != read_file(b / rel)) {
      why = "byte mismatch in " + rel.string();
      return false;
    }
  }
  return true;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

} // namespace

int main(int argc, char** argv) {
  const std::string config_path = argc > 1 ? argv[1] : "configs/reference.json";
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "cannot load " << config_path << ": " << e.what() << "\n";
    return 3;
  }
  const json acc = cfg.raw.value("acceptance", json::object());
  const auto num = [&acc](const char* key, double fallback) {
    return acc.value(key, fallback);
  };

  Gate gate;

  // 1. Back-action-to-thermal ratio at the published circulating power.
  gate.run(1, 1.0, [&]() -> std::pair<bool, std::string> {
    const json v = run_reproduce_target(cfg, "ratio325", k_gate_seed, 1, "", "csv");
    const double ratio = v["measured"]["ratio_qba_thermal"].get<double>();
    const bool ok = v["pass"].get<bool>();
    return {ok, "reproduce ratio325: S_q/S_th(" + fmt(cfg.budget.ratio_frequency_hz) +
                    " Hz) = " + fmt(ratio) + ", window [" + fmt(cfg.ratio325.ratio_min) +
                    ", " + fmt(cfg.ratio325.ratio_max) + "] at p_circ = " +
                    fmt(cfg.ratio325.circulating_power_w) + " W"};
  });

  // 2. Torsional stability margin of the folded cavity.
  gate.run(2, 1.0, [&]() -> std::pair<bool, std::string> {
    const WireMechanics wm = wire_mechanics(cfg.mech);
    const TorsionalStability ts = torsional_stability(cfg.cavity, wm.k_t_wire);
    const double lo = num("margin_min", 35.0);
    const double hi = num("margin_max", 65.0);
    const bool ok = ts.stable && ts.power_margin >= lo && ts.power_margin <= hi;
    return {ok, "power margin = " + fmt(ts.power_margin) + ", window [" + fmt(lo) + ", " +
                    fmt(hi) + "], triangular geometry stable = " +
                    (ts.stable ? "true" : "false")};
  });

  // 3. Gravitational dilution and first violin mode of the wire.
  gate.run(3, 1.0, [&]() -> std::pair<bool, std::string> {
    const WireMechanics wm = wire_mechanics(cfg.mech);
    const double dlo = num("dilution_min", 450.0);
    const double dhi = num("dilution_max", 700.0);
    const double vlo = num("violin_f1_min_hz", 170.0);
    const double vhi = num("violin_f1_max_hz", 215.0);
    const bool ok = wm.dilution >= dlo && wm.dilution <= dhi && wm.violin_f1 >= vlo &&
                    wm.violin_f1 <= vhi;
    return {ok, "dilution = " + fmt(wm.dilution) + " in [" + fmt(dlo) + ", " + fmt(dhi) +
                    "], violin f1 = " + fmt(wm.violin_f1) + " Hz in [" + fmt(vlo) + ", " +
                    fmt(vhi) + "]"};
  });

  // 4. Optical spring: trapped resonance in window, sweep rising from the
  // pendulum frequency as the detuning vanishes.
  gate.run(4, 1.0, [&]() -> std::pair<bool, std::string> {
    const json v = run_reproduce_target(cfg, "optical_spring", k_gate_seed, 1, "", "csv");
    const double f_eff = v["measured"]["f_eff_hz"].get<double>();
    const double f_peak = v["measured"]["peak_f_eff_hz"].get<double>();

    ExperimentConfig c = cfg;
    c.laser.input_power = cfg.optical_spring_scn.input_power_w;
    const DetuningSweep limit = detuning_sweep(c.cavity, c.laser, c.mech, {1.0e-8});
    const double f_m = pendulum_mode(c.mech).omega_m / k_two_pi;
    const double limit_dev = std::abs(limit.points[0].f_eff_hz - f_m) / f_m;

    const bool ok = v["pass"].get<bool>() && limit_dev < 1.0e-3;
    return {ok, "f_eff = " + fmt(f_eff) + " Hz in [" + fmt(cfg.optical_spring_scn.f_eff_min_hz) +
                    ", " + fmt(cfg.optical_spring_scn.f_eff_max_hz) + "], sweep peak " +
                    fmt(f_peak) + " Hz, f_eff(delta->0) -> " +
                    fmt(limit.points[0].f_eff_hz) + " Hz vs pendulum " + fmt(f_m) + " Hz"};
  });

  // 5. Closed-form monitor transfers against the generic loop-graph solver
  // on random block stubs. Monitor3's closed form assumes negligible
  // feedback, so its stub gets the actuator zeroed; ill-conditioned draws
  // (near-singular loop) are redrawn.
  gate.run(5, 10.0, [&]() -> std::pair<bool, std::string> {
    const auto n_stubs = static_cast<std::size_t>(num("loop_oracle_stubs", 100.0));
    const double tol = num("loop_oracle_rel_tol", 1.0e-10);
    SplitMix64 rng(sub_seed("loop-oracle"));
    const double omega = 1.0;
    double max_rel = 0.0;
    std::size_t accepted = 0, attempts = 0;
    while (accepted < n_stubs && attempts < 50 * n_stubs) {
      ++attempts;
      const cplx pend = random_gain(rng), c = random_gain(rng), opt = random_gain(rng),
                 pdh = random_gain(rng), pd = random_gain(rng), servo = random_gain(rng),
                 act = random_gain(rng);
      const LoopModel lm = make_stub(pend, c, opt, pdh, pd, servo, act);
      const LoopGains g = loop_gains(lm, omega);
      if (std::abs(1.0 - g.g1 - g.g2) < 1.0e-4 || std::abs(1.0 - g.g1) < 1.0e-4) continue;
      ++accepted;

      const Monitor1Transfer m1 = monitor1_transfer(lm, omega);
      const auto gf = solve_loop_graph(lm, omega, Injection::force_on_pendulum);
      const auto gs = solve_loop_graph(lm, omega, Injection::sensing_equivalent_force);
      max_rel = std::max(max_rel, rel_dev(m1.from_force, gf.monitor1));
      max_rel = std::max(max_rel, rel_dev(m1.from_sensing, gs.monitor1));

      const LoopModel quiet = make_stub(pend, c, opt, pdh, pd, servo, cplx(0.0, 0.0));
      const cplx m3 = monitor3_transfer(quiet, omega);
      const auto gd = solve_loop_graph(quiet, omega, Injection::sensing_displacement);
      max_rel = std::max(max_rel, rel_dev(m3, gd.monitor3));
    }
    const bool ok = accepted == n_stubs && max_rel <= tol;
    return {ok, fmt(static_cast<double>(accepted)) + " stubs, max relative deviation " +
                    fmt(max_rel) + " vs tolerance " + fmt(tol) +
                    " (monitor1 force+sensing, monitor3 with actuator off)"};
  });

  // 6. Estimator calibration on synthetic records.
  gate.run(6, 120.0, [&]() -> std::pair<bool, std::string> {
    // (a) Welch bias on white noise, averaged over seeds.
    const auto n_seeds = static_cast<std::size_t>(num("welch_bias_seeds", 200.0));
    const double bias_tol = num("welch_bias_tol", 0.01);
    const double s1 = 2.0;
    const std::uint64_t base_a = sub_seed("welch-bias");
    double mean_psd = 0.0;
    for (std::size_t i = 0; i < n_seeds; ++i) {
      const TimeSeries ts =
          colored_noise([s1](double) { return s1; }, 1024.0, 8.0, SplitMix64::mix(base_a, i));
      const SpectralEstimate est = welch_asd(ts, 0.5, WindowKind::hann, 0.5);
      mean_psd += band_mean_psd(est, 10.0, 400.0);
    }
    const double bias = mean_psd / (static_cast<double>(n_seeds) * s1) - 1.0;
    const bool ok_a = std::abs(bias) < bias_tol;

    // (b) Rayleigh stationarity: false-rejection rate on stationary Gaussian
    // input, detection of a 2x mid-record amplitude step. Disjoint segments
    // keep the per-segment magnitudes independent; 160 s records give 320
    // magnitudes, enough for the step test to sit well above 50% power.
    const auto n_trials = static_cast<std::size_t>(num("rayleigh_trials", 1000.0));
    const double rate_center = num("rayleigh_rate_center", 0.01);
    const double rate_tol = num("rayleigh_rate_tol", 0.007);
    const std::uint64_t base_b = sub_seed("rayleigh-rate");
    std::size_t rejects = 0;
    for (std::size_t t = 0; t < n_trials; ++t) {
      const TimeSeries ts =
          colored_noise([](double) { return 2.0; }, 256.0, 160.0, SplitMix64::mix(base_b, t));
      const auto mags = segment_bin_magnitudes(ts, 0.5, WindowKind::rectangular, 0.0, 64.0);
      if (!rayleigh_stationarity_test(mags).stationary) ++rejects;
    }
    const double rate = static_cast<double>(rejects) / static_cast<double>(n_trials);
    const bool ok_b1 = std::abs(rate - rate_center) <= rate_tol;

    const auto n_step = static_cast<std::size_t>(num("rayleigh_step_trials", 100.0));
    const double step_min = num("rayleigh_step_min_rate", 0.5);
    const std::uint64_t base_s = sub_seed("rayleigh-step");
    std::size_t step_rejects = 0;
    for (std::size_t t = 0; t < n_step; ++t) {
      TimeSeries ts =
          colored_noise([](double) { return 2.0; }, 256.0, 160.0, SplitMix64::mix(base_s, t));
      for (std::size_t i = ts.samples.size() / 2; i < ts.samples.size(); ++i) {
        ts.samples[i] *= 2.0;
      }
      const auto mags = segment_bin_magnitudes(ts, 0.5, WindowKind::rectangular, 0.0, 64.0);
      if (!rayleigh_stationarity_test(mags).stationary) ++step_rejects;
    }
    const double step_rate = static_cast<double>(step_rejects) / static_cast<double>(n_step);
    const bool ok_b2 = step_rate >= step_min;

    // (c) ASD slope recovery over a decade-wide band. Hann windowing keeps
    // leakage from the steep upper band from biasing the +1 exponent.
    const auto exponents = acc.value("slope_exponents", std::vector<double>{-0.5, 0.0, 1.0});
    const double slope_tol = num("slope_tol", 0.05);
    const std::uint64_t base_c = sub_seed("slope");
    double max_slope_dev = 0.0;
    for (std::size_t k = 0; k < exponents.size(); ++k) {
      const double s = exponents[k];
      const auto target = [s](double f) { return f <= 0.0 ? 0.0 : std::pow(f / 10.0, 2.0 * s); };
      const TimeSeries ts = colored_noise(target, 512.0, 256.0, SplitMix64::mix(base_c, k));
      const SpectralEstimate est = welch_asd(ts, 4.0, WindowKind::hann, 0.5);
      const FitResult fit = fit_slope(est, 4.0, 40.0);
      max_slope_dev = std::max(max_slope_dev, std::abs(fit.param("slope") - s));
    }
    const bool ok_c = max_slope_dev <= slope_tol;

    // (d) Noiseless ringdown recovers the configured quality factor.
    const double q_true = cfg.mech.quality_factor;
    const double omega_m = pendulum_mode(cfg.mech).omega_m;
    const RingdownSeries rd =
        ringdown_series(omega_m, q_true, cfg.ringdown.amplitude, cfg.ringdown.sample_rate_hz,
                        cfg.ringdown.duration_s, 0.0, sub_seed("ringdown"),
                        cfg.ringdown.lowpass_bw_hz);
    const FitResult rfit = fit_ringdown(rd);
    const double q_dev = std::abs(rfit.param("q") - q_true) / q_true;
    const bool ok_d = rfit.converged && q_dev <= num("ringdown_noiseless_rel_tol", 0.001);

    // (e) Lorentzian sweep recovers the cavity linewidth under noise.
    const LorentzianSweep sweep = lorentzian_sweep(
        cfg.cavity.kappa, cfg.linewidth.sweep_rate_hz_per_s, cfg.linewidth.sample_rate_hz,
        num("lorentzian_noise_rms", 0.01), sub_seed("lorentzian"),
        cfg.linewidth.span_half_widths);
    const FitResult lfit = fit_lorentzian(sweep.ts, cfg.linewidth.sweep_rate_hz_per_s);
    const double kappa_dev = std::abs(lfit.param("kappa") - cfg.cavity.kappa) / cfg.cavity.kappa;
    const bool ok_e = lfit.converged && kappa_dev <= num("lorentzian_rel_tol", 0.005);

    const bool ok = ok_a && ok_b1 && ok_b2 && ok_c && ok_d && ok_e;
    return {ok, "welch bias " + fmt(100.0 * bias) + "%, rayleigh false-reject " +
                    fmt(100.0 * rate) + "% (want " + fmt(100.0 * rate_center) + "+-" +
                    fmt(100.0 * rate_tol) + "%), step detect " + fmt(100.0 * step_rate) +
                    "%, max slope dev " + fmt(max_slope_dev) + ", ringdown Q dev " +
                    fmt(100.0 * q_dev) + "%, lorentzian kappa dev " + fmt(100.0 * kappa_dev) +
                    "%"};
  });

  // 7. Power-dependence decomposition coverage across seeded trials.
  gate.run(7, 60.0, [&]() -> std::pair<bool, std::string> {
    const auto n_trials = static_cast<std::size_t>(num("coverage_trials", 100.0));
    const auto min_within = static_cast<std::size_t>(num("coverage_min_within", 90.0));
    const std::uint64_t base = sub_seed("fig4a-coverage");
    std::size_t within = 0;
    for (std::size_t t = 0; t < n_trials; ++t) {
      const Fig4aTrial trial = run_fig4a_trial(cfg, SplitMix64::mix(base, t));
      if (trial.within(cfg.fig4a.coverage_n_sigma)) ++within;
    }
    const bool ok = within >= min_within;
    return {ok, fmt(static_cast<double>(within)) + "/" + fmt(static_cast<double>(n_trials)) +
                    " trials inside " + fmt(cfg.fig4a.coverage_n_sigma) +
                    " sigma on (c0, c1, c2), need >= " + fmt(static_cast<double>(min_within))};
  });

  // 8. Determinism: every reproduce target rerun with the same seed writes
  // byte-identical files.
  gate.run(8, 240.0, [&]() -> std::pair<bool, std::string> {
    const fs::path root = fs::temp_directory_path() / "optomech_acceptance";
    std::error_code ec;
    fs::remove_all(root, ec);
    double max_run_s = 0.0;
    std::string failure;
    for (const auto& target : reproduce_targets()) {
      const fs::path a = root / target / "a";
      const fs::path b = root / target / "b";
      fs::create_directories(a);
      fs::create_directories(b);
      for (const auto& dir : {a, b}) {
        const auto t0 = clock_type::now();
        run_reproduce_target(cfg, target, k_gate_seed, 1, dir.string(), "csv");
        max_run_s = std::max(
            max_run_s, std::chrono::duration<double>(clock_type::now() - t0).count());
      }
      std::string why;
      if (!dirs_identical(a, b, why)) {
        failure = target + ": " + why;
        break;
      }
    }
    if (max_run_s >= 120.0 && failure.empty()) failure = "single run exceeded 120 s";
    const bool ok = failure.empty();
    return {ok, ok ? "7/7 targets byte-identical on rerun, slowest single run " +
                         fmt(max_run_s) + " s"
                   : failure};
  });

  std::cout << "acceptance: " << (8 - gate.failures) << "/8 criteria passed\n";
  return gate.failures == 0 ? 0 : 1;
}
