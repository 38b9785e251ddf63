#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "optomech/analysis.hpp"
#include "optomech/config.hpp"
#include "optomech/constants.hpp"
#include "optomech/rng.hpp"
#include "optomech/scenarios.hpp"
#include "optomech/synth.hpp"

using namespace optomech;

namespace {

TimeSeries tone(double amplitude, double f0, double fs, double duration) {
  TimeSeries ts;
  ts.sample_rate = fs;
  const std::size_t n = static_cast<std::size_t>(duration * fs);
  ts.samples.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    ts.samples[k] = amplitude * std::sin(k_two_pi * f0 * static_cast<double>(k) / fs);
  }
  return ts;
}

double band_mean_psd(const SpectralEstimate& est, double lo, double hi) {
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < est.grid_hz.size(); ++k) {
    if (est.grid_hz[k] < lo || est.grid_hz[k] > hi) continue;
    acc += est.psd[k];
    ++n;
  }
  return acc / static_cast<double>(n);
}

std::vector<double> rayleigh_draws(SplitMix64& rng, std::size_t n, double scale) {
  std::vector<double> m(n);
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = scale * std::hypot(rng.next_gaussian(), rng.next_gaussian());
  }
  return m;
}

} // namespace

TEST_CASE("welch estimate of a pure tone") {
  const double fs = 1280.0;
  const double amp = 2.0;
  const TimeSeries ts = tone(amp, 100.0, fs, 8.0);
  const SpectralEstimate est = welch_asd(ts, 0.4);

  CHECK(est.enbw_hz == 2.5);  // rectangular 0.4 s segments
  CHECK(est.window == "rectangular");
  CHECK(est.segment_duration_s == 0.4);
  REQUIRE(est.grid_hz.size() == 257);
  CHECK(est.grid_hz[40] == doctest::Approx(100.0).epsilon(1e-15));

  SUBCASE("peak PSD times ENBW recovers the tone power") {
    // on-bin tone with a rectangular window: no leakage
    CHECK(est.psd[40] * est.enbw_hz ==
          doctest::Approx(amp * amp / 2.0).epsilon(1e-6));
    CHECK(est.asd[40] * est.asd[40] == doctest::Approx(est.psd[40]).epsilon(1e-15));
    // neighbours carry essentially nothing
    CHECK(est.psd[42] < 1e-10 * est.psd[40]);
  }
}

TEST_CASE("welch is unbiased on white noise for both windows") {
  const double s1 = 3.0;
  const TimeSeries ts = colored_noise([s1](double) { return s1; }, 1024.0, 96.0, 2718);

  const SpectralEstimate rect = welch_asd(ts, 0.5);
  CHECK(band_mean_psd(rect, 10.0, 400.0) == doctest::Approx(s1).epsilon(0.03));

  const SpectralEstimate hann = welch_asd(ts, 0.5, WindowKind::hann);
  CHECK(hann.window == "hann");
  CHECK(hann.enbw_hz == doctest::Approx(1.5 / 0.5).epsilon(1e-9));
  CHECK(band_mean_psd(hann, 10.0, 400.0) == doctest::Approx(s1).epsilon(0.03));
}

TEST_CASE("welch input validation") {
  const TimeSeries ts = tone(1.0, 50.0, 256.0, 2.0);
  CHECK_THROWS_AS(welch_asd(ts, 0.0), std::domain_error);
  CHECK_THROWS_AS(welch_asd(ts, 0.5, WindowKind::rectangular, 1.0), std::domain_error);
  CHECK_THROWS_AS(welch_asd(ts, 0.5, WindowKind::rectangular, -0.1), std::domain_error);
  CHECK_THROWS_AS(welch_asd(ts, 0.02), std::domain_error);  // 5-sample segment
  CHECK_THROWS_AS(welch_asd(ts, 4.0), std::domain_error);   // longer than the record
  CHECK_THROWS_AS(welch_asd(ts, 2.0), std::domain_error);   // single segment only
}

TEST_CASE("per-segment bin magnitudes normalize to the one-sided PSD") {
  const double s1 = 2.0;
  const TimeSeries ts = colored_noise([s1](double) { return s1; }, 1280.0, 160.0, 512);
  const std::vector<double> mags =
      segment_bin_magnitudes(ts, 0.4, WindowKind::rectangular, 0.0, 325.0);
  REQUIRE(mags.size() == 400);

  double mean_sq = 0.0;
  for (double m : mags) mean_sq += m * m;
  mean_sq /= static_cast<double>(mags.size());
  CHECK(mean_sq == doctest::Approx(s1).epsilon(0.15));

  SUBCASE("the same segments feed the averaged estimate") {
    const SpectralEstimate est = welch_asd(ts, 0.4, WindowKind::rectangular, 0.0);
    const std::size_t bin = 130;  // 325 Hz at 2.5 Hz spacing
    CHECK(est.grid_hz[bin] == doctest::Approx(325.0).epsilon(1e-15));
    CHECK(mean_sq == doctest::Approx(est.psd[bin]).epsilon(1e-12));
  }

  CHECK_THROWS_AS(segment_bin_magnitudes(ts, 0.4, WindowKind::rectangular, 0.0, 900.0),
                  std::domain_error);
}

TEST_CASE("rayleigh stationarity test") {
  SplitMix64 rng(20240814);

  SUBCASE("accepts stationary Rayleigh magnitudes") {
    const std::vector<double> mags = rayleigh_draws(rng, 400, 2.0);
    const RayleighTestResult r = rayleigh_stationarity_test(mags);
    CHECK(r.stationary);
    CHECK(r.p_value > 0.01);
    CHECK(r.fitted_scale == doctest::Approx(2.0).epsilon(0.05));
    CHECK(r.dof == 38);
    std::size_t total = 0;
    for (std::size_t c : r.histogram) total += c;
    CHECK(total == mags.size());
  }

  SUBCASE("false-rejection rate sits near the threshold") {
    std::size_t rejected = 0;
    const std::size_t trials = 400;
    for (std::size_t i = 0; i < trials; ++i) {
      const std::vector<double> mags = rayleigh_draws(rng, 200, 1.0);
      if (!rayleigh_stationarity_test(mags).stationary) ++rejected;
    }
    const double rate = static_cast<double>(rejected) / static_cast<double>(trials);
    CHECK(rate < 0.03);
  }

  SUBCASE("detects a mid-record variance step") {
    std::vector<double> mags = rayleigh_draws(rng, 200, 1.0);
    const std::vector<double> loud = rayleigh_draws(rng, 200, 3.0);
    mags.insert(mags.end(), loud.begin(), loud.end());
    const RayleighTestResult r = rayleigh_stationarity_test(mags);
    CHECK_FALSE(r.stationary);
  }

  SUBCASE("a constant magnitude is maximally non-stationary") {
    const std::vector<double> mags(64, 1.0);
    const RayleighTestResult r = rayleigh_stationarity_test(mags);
    CHECK_FALSE(r.stationary);
    CHECK(r.p_value < 1e-10);
  }

  SUBCASE("rejects short or invalid inputs") {
    CHECK_THROWS_AS(rayleigh_stationarity_test(std::vector<double>(10, 1.0)),
                    insufficient_data_error);
    std::vector<double> bad(32, 1.0);
    bad[7] = -1.0;
    CHECK_THROWS_AS(rayleigh_stationarity_test(bad), std::domain_error);
  }
}

TEST_CASE("a gain step in the record fails the stationarity gate") {
  TimeSeries ts = colored_noise([](double) { return 1.0; }, 256.0, 80.0, 606);
  for (std::size_t k = ts.samples.size() / 2; k < ts.samples.size(); ++k) {
    ts.samples[k] *= 3.0;
  }
  const std::vector<double> mags =
      segment_bin_magnitudes(ts, 0.5, WindowKind::rectangular, 0.0, 64.0);
  CHECK_FALSE(rayleigh_stationarity_test(mags).stationary);
}

TEST_CASE("spectral slope fits in log-log space") {
  for (double slope : {-0.5, 0.0, 1.0}) {
    CAPTURE(slope);
    const auto target = [slope](double f) {
      return f <= 0.0 ? 0.0 : std::pow(f / 10.0, 2.0 * slope);
    };
    // Hann keeps leakage from the steep upper band out of the fit; a
    // rectangular window biases the +1 exponent low by several percent.
    const TimeSeries ts = colored_noise(target, 512.0, 256.0, 161803);
    const SpectralEstimate est = welch_asd(ts, 4.0, WindowKind::hann, 0.5);
    const FitResult fit = fit_slope(est, 4.0, 40.0);
    CHECK(fit.converged);
    CHECK(std::abs(fit.param("slope") - slope) < 0.05);
    CHECK(fit.has("intercept"));
    CHECK(fit.sigma("slope") < 0.02);
  }
}

TEST_CASE("slope fit diagnostics") {
  const TimeSeries ts = colored_noise([](double) { return 1.0; }, 512.0, 64.0, 55);
  const SpectralEstimate est = welch_asd(ts, 4.0, WindowKind::hann, 0.5);

  SUBCASE("band edges and minimum bin count") {
    CHECK_THROWS_AS(fit_slope(est, 40.0, 4.0), std::domain_error);
    CHECK_THROWS_AS(fit_slope(est, 300.0, 400.0), std::domain_error);
    CHECK_THROWS_WITH_AS(fit_slope(est, 4.0, 4.5), doctest::Contains("usable bins"),
                         std::domain_error);
  }

  SUBCASE("a spectral knee inflates the residual statistic") {
    // Smooth step from 1 to 100 at 25 Hz; the plateau above the knee keeps
    // broadband leakage from washing out the shape.
    const auto knee = [](double f) {
      const double r8 = std::pow(f / 25.0, 8.0);
      return 1.0 + 99.0 * r8 / (1.0 + r8);
    };
    const TimeSeries bent = colored_noise(knee, 512.0, 256.0, 56);
    const SpectralEstimate bent_est = welch_asd(bent, 4.0, WindowKind::hann, 0.5);
    const FitResult straight = fit_slope(est, 4.0, 40.0);
    const FitResult curved = fit_slope(bent_est, 4.0, 40.0);
    CHECK(curved.residual_stat > 5.0 * straight.residual_stat);
    CHECK(curved.residual_stat > 2.0);
  }

  CHECK_THROWS_AS(fit_slope(est, 4.0, 40.0).param("quality"), std::invalid_argument);
}

TEST_CASE("power-law decomposition of the force noise versus power") {
  SUBCASE("exactly linear data pins the linear term") {
    std::vector<PowerPointSample> pts;
    for (double p : {1.0, 2.0, 3.0, 4.0}) {
      pts.push_back({p, std::sqrt(3.0 * p), 0.01 * std::sqrt(3.0 * p)});
    }
    const FitResult fit = fit_power_dependence(pts, {});
    CHECK(fit.converged);
    CHECK(fit.param("c1") == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(std::abs(fit.param("c0")) < 1e-8);
    CHECK(std::abs(fit.param("c2")) < 1e-8);
    CHECK(fit.has("n_clamped"));
  }

  SUBCASE("floor plus quadratic data recovers both terms") {
    std::vector<PowerPointSample> pts;
    for (double p : {1.0, 2.0, 3.0, 4.0, 5.0}) {
      const double y = 4.0 + 2.0 * p * p;
      pts.push_back({p, std::sqrt(y), 0.01 * std::sqrt(y)});
    }
    const FitResult fit = fit_power_dependence(pts, {});
    CHECK(fit.param("c0") == doctest::Approx(4.0).epsilon(1e-6));
    CHECK(fit.param("c2") == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(std::abs(fit.param("c1")) < 1e-6);
  }

  SUBCASE("noise falling with power clamps both power terms") {
    std::vector<PowerPointSample> pts;
    for (double p : {1.0, 2.0, 3.0, 4.0}) {
      const double y = 10.0 - 2.0 * p;  // decreasing: no non-negative slope fits
      pts.push_back({p, std::sqrt(y), 0.05 * std::sqrt(y)});
    }
    const FitResult fit = fit_power_dependence(pts, {});
    CHECK(fit.param("c1") == 0.0);
    CHECK(fit.param("c2") == 0.0);
    CHECK(fit.param("c0") > 0.0);
    CHECK(fit.param("n_clamped") == 2.0);
  }

  SUBCASE("noisy full model is recovered within its uncertainties") {
    SplitMix64 rng(777);
    std::vector<PowerPointSample> pts;
    for (int i = 1; i <= 8; ++i) {
      const double p = static_cast<double>(i);
      const double y = 4.0 + 3.0 * p + 2.0 * p * p;
      const double asd_true = std::sqrt(y);
      const double sigma = 0.02 * asd_true;
      pts.push_back({p, asd_true + sigma * rng.next_gaussian(), sigma});
    }
    const FitResult fit = fit_power_dependence(pts, {4.0, 8.0});
    CHECK(fit.converged);
    CHECK(std::abs(fit.param("c0") - 4.0) < 4.0 * fit.sigma("c0"));
    CHECK(std::abs(fit.param("c1") - 3.0) < 4.0 * fit.sigma("c1"));
    CHECK(std::abs(fit.param("c2") - 2.0) < 4.0 * fit.sigma("c2"));
    // the pinned floor at the true value must beat the wrong floor
    CHECK(fit.param("chi2_viscous_floor") < fit.param("chi2_structure_floor"));
    CHECK(fit.param("delta_chi2") < 0.0);
  }

  SUBCASE("all-zero input short-circuits") {
    std::vector<PowerPointSample> pts;
    for (double p : {1.0, 2.0, 3.0, 4.0}) pts.push_back({p, 0.0, 0.0});
    const FitResult fit = fit_power_dependence(pts, {});
    CHECK(fit.converged);
    CHECK(fit.param("c0") == 0.0);
    CHECK(fit.param("c1") == 0.0);
    CHECK(fit.param("c2") == 0.0);
  }

  SUBCASE("input validation") {
    std::vector<PowerPointSample> pts = {{1.0, 1.0, 0.1}, {2.0, 1.0, 0.1},
                                         {2.0, 1.1, 0.1}, {3.0, 1.2, 0.1}};
    CHECK_THROWS_AS(fit_power_dependence(pts, {}), std::domain_error);
    pts[0].p_in = -1.0;
    CHECK_THROWS_AS(fit_power_dependence(pts, {}), std::domain_error);
  }
}

TEST_CASE("synthetic power sweep agrees with its generating budget") {
  const Fig4aTrial trial = run_fig4a_trial(default_config(), 99);
  CHECK(trial.fit.converged);
  CHECK(trial.c0_true > 0.0);
  CHECK(trial.c1_true > 0.0);
  CHECK(trial.c2_true > 0.0);
  CHECK(trial.within(3.0));
  REQUIRE(trial.points.size() == default_config().fig4a.powers_w.size());
  for (std::size_t i = 0; i < trial.points.size(); ++i) {
    CHECK(trial.points[i].asd_sigma > 0.0);
    // measured ASD within 5 sigma of the generating model
    CHECK(std::abs(trial.points[i].asd - trial.model_asd[i]) <
          5.0 * trial.points[i].asd_sigma);
  }
}

TEST_CASE("ringdown quality-factor estimation") {
  const double omega_m = 14.0;
  const double q_true = 3.2e5;

  SUBCASE("noiseless decay is recovered to a tenth of a percent") {
    const RingdownSeries rd = ringdown_series(omega_m, q_true, 1.0, 142.6, 2000.0, 0.0, 21);
    const FitResult fit = fit_ringdown(rd);
    CHECK(fit.converged);
    CHECK(fit.param("q") == doctest::Approx(q_true).epsilon(1e-3));
    CHECK(fit.param("omega_m") == doctest::Approx(omega_m).epsilon(1e-4));
    CHECK(fit.param("decay_rate") ==
          doctest::Approx(omega_m / (2.0 * q_true)).epsilon(1e-3));
  }

  SUBCASE("a noisy record still lands within a few percent") {
    const RingdownSeries rd = ringdown_series(omega_m, q_true, 1.0, 142.6, 2000.0, 0.02, 22);
    const FitResult fit = fit_ringdown(rd);
    CHECK(fit.converged);
    CHECK(fit.param("q") == doctest::Approx(q_true).epsilon(0.03));
    CHECK(fit.sigma("q") > 0.0);
  }

  SUBCASE("repeated trials scatter consistently with their errors") {
    const RingdownTrials trials =
        ringdown_trials(omega_m, q_true, 1.0, 142.6, 2000.0, 0.02, 550, 30);
    REQUIRE(trials.q_values.size() == 30);
    CHECK(trials.mean_q == doctest::Approx(q_true).epsilon(0.02));
    CHECK(trials.consistency_p > 1e-3);
    CHECK(trials.sigma_q > 0.0);
  }

  SUBCASE("a growing envelope does not converge") {
    RingdownSeries rd;
    rd.envelope_dt = 1.0;
    rd.demod_omega = omega_m;
    for (int j = 0; j < 64; ++j) {
      rd.i_env.push_back(std::exp(1.0e-3 * j));
      rd.q_env.push_back(0.0);
    }
    const FitResult fit = fit_ringdown(rd);
    CHECK_FALSE(fit.converged);
    CHECK(fit.param("decay_rate") < 0.0);
  }

  SUBCASE("degenerate envelopes are rejected") {
    RingdownSeries rd;
    rd.i_env = {1.0, 0.9, 0.8};
    rd.q_env = {0.0, 0.0, 0.0};
    CHECK_THROWS_AS(fit_ringdown(rd), insufficient_data_error);

    // Successive magnitudes jump by a factor of two, so every point sits
    // below three times the difference-based noise floor.
    RingdownSeries buried;
    buried.envelope_dt = 1.0;
    buried.demod_omega = omega_m;
    for (int i = 0; i < 64; ++i) {
      buried.i_env.push_back(i % 2 == 0 ? 1e-3 : 2e-3);
      buried.q_env.push_back(0.0);
    }
    CHECK_THROWS_AS(fit_ringdown(buried), insufficient_data_error);
  }
}

TEST_CASE("lorentzian linewidth fit of the swept transmission") {
  const double kappa = k_two_pi * 1.181e6;
  const double rate = 1.0e10;
  const double fs = 2.0e7;

  SUBCASE("noiseless sweep") {
    const LorentzianSweep sweep = lorentzian_sweep(kappa, rate, fs, 0.0, 31);
    const FitResult fit = fit_lorentzian(sweep.ts, rate);
    CHECK(fit.converged);
    CHECK(fit.param("kappa") == doctest::Approx(kappa).epsilon(1e-4));
    CHECK(fit.param("center_time") == doctest::Approx(sweep.center_time).epsilon(1e-3));
    CHECK(fit.param("halfwidth_s") ==
          doctest::Approx((kappa / k_two_pi) / rate).epsilon(1e-4));
  }

  SUBCASE("one percent additive noise") {
    const LorentzianSweep sweep = lorentzian_sweep(kappa, rate, fs, 0.01, 32);
    const FitResult fit = fit_lorentzian(sweep.ts, rate);
    CHECK(fit.converged);
    CHECK(fit.param("kappa") == doctest::Approx(kappa).epsilon(5e-3));
  }

  SUBCASE("the fit is invariant under trace rescaling") {
    const LorentzianSweep sweep = lorentzian_sweep(kappa, rate, fs, 0.01, 33);
    TimeSeries scaled = sweep.ts;
    for (double& v : scaled.samples) v *= 1e6;
    const double k1 = fit_lorentzian(sweep.ts, rate).param("kappa");
    const double k2 = fit_lorentzian(scaled, rate).param("kappa");
    CHECK(k2 == doctest::Approx(k1).epsilon(1e-6));
  }

  SUBCASE("a featureless noisy trace has no resonance") {
    const TimeSeries noise =
        colored_noise([](double) { return 1.0; }, fs, 65536.0 / fs, 77);
    CHECK_THROWS_AS(fit_lorentzian(noise, rate), no_resonance_error);
  }

  SUBCASE("validation") {
    TimeSeries tiny;
    tiny.sample_rate = fs;
    tiny.samples.assign(10, 0.0);
    CHECK_THROWS_AS(fit_lorentzian(tiny, rate), std::domain_error);
    const LorentzianSweep sweep = lorentzian_sweep(kappa, rate, fs, 0.0, 34);
    CHECK_THROWS_AS(fit_lorentzian(sweep.ts, 0.0), std::domain_error);
  }
}
