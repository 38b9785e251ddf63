#ifndef OPTOMECH_ANALYSIS_HPP
#define OPTOMECH_ANALYSIS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "optomech/spectral.hpp"
#include "optomech/synth.hpp"

namespace optomech {

struct insufficient_data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct no_resonance_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class WindowKind { rectangular, hann };
std::string to_string(WindowKind w);

// Averaged modified periodogram, one-sided, window-power normalized.
// ENBW = fs*sum(w^2)/sum(w)^2; rectangular 0.4 s segments give 2.5 Hz.
SpectralEstimate welch_asd(const TimeSeries& ts, double segment_duration_s,
                           WindowKind window = WindowKind::rectangular,
                           double overlap = 0.5);

// Magnitudes of the DFT bin nearest f_hz, one per segment, normalized so the
// mean square equals the one-sided PSD there. Feed to the stationarity test.
std::vector<double> segment_bin_magnitudes(const TimeSeries& ts, double segment_duration_s,
                                           WindowKind window, double overlap, double f_hz);

struct RayleighTestResult {
  double p_value = 0.0;
  double fitted_scale = 0.0;           // Rayleigh sigma, maximum likelihood
  double chi2 = 0.0;
  std::size_t dof = 0;
  std::vector<std::size_t> histogram;  // counts in equal-probability bins
  bool stationary = false;             // p_value > threshold
};

// Pearson chi-square goodness of fit of bin magnitudes against the fitted
// Rayleigh distribution, over max(5, n/10) equal-probability bins with one
// degree of freedom deducted for the fitted scale.
RayleighTestResult rayleigh_stationarity_test(const std::vector<double>& magnitudes,
                                              double p_threshold = 0.01);

struct FitParameter {
  std::string name;
  double value = 0.0;
  double sigma = 0.0;
};

struct FitResult {
  std::vector<FitParameter> parameters;
  double residual_stat = 0.0;   // reduced weighted sum of squared residuals
  bool converged = false;

  bool has(const std::string& name) const;
  double param(const std::string& name) const;   // throws on unknown name
  double sigma(const std::string& name) const;
};

// Weighted least squares of log(ASD) vs log(f) over [f_lo, f_hi]; per-bin
// log variance from the segment count (trigamma). Returns "slope" and
// "intercept"; residual_stat flags a non-power-law band.
FitResult fit_slope(const SpectralEstimate& est, double f_lo_hz, double f_hi_hz);

struct PowerPointSample {
  double p_in = 0.0;       // W
  double asd = 0.0;        // single-sided, at the probe frequency
  double asd_sigma = 0.0;
};

// One-sided PSD floors of the two damping hypotheses at the probe frequency
// (thermal + sensing), for the model-comparison statistic.
struct PowerFitHypotheses {
  double viscous_floor_psd = 0.0;
  double structure_floor_psd = 0.0;
};

// Fits ASD^2 = c0 + c1*P + c2*P^2 with non-negative components (best feasible
// subset). Returns c0/c1/c2 with uncertainties from the unconstrained
// covariance, "n_clamped", and "chi2_viscous_floor"/"chi2_structure_floor"/
// "delta_chi2" comparing the two fixed-floor hypotheses.
FitResult fit_power_dependence(const std::vector<PowerPointSample>& points,
                               const PowerFitHypotheses& hypotheses);

// Log-linear fit of the I/Q envelope magnitude. Samples are decimated to the
// low-pass length and those below 3x the estimated noise floor are excluded.
// Returns "q", "omega_m", "decay_rate", "amplitude"; a non-decaying envelope
// comes back with converged=false and q at infinity.
FitResult fit_ringdown(const RingdownSeries& envelopes);

struct RingdownTrials {
  std::vector<double> q_values;
  std::vector<double> q_sigmas;
  double mean_q = 0.0;
  double sigma_q = 0.0;        // sample standard deviation
  double consistency_p = 0.0;  // chi^2 p: sample scatter vs per-trial sigma
};

// Repeated noisy ringdowns with per-trial seeds derived from base_seed.
RingdownTrials ringdown_trials(double omega_m, double quality_factor, double amplitude,
                               double fs, double duration, double additive_noise_rms,
                               std::uint64_t base_seed, std::size_t n_trials,
                               double lowpass_bw_hz = 0.0);

// Nonlinear least squares of a Lorentzian in time against the sweep trace.
// Initial guesses come from the smoothed peak and half-max crossings; the
// fitted half width in seconds converts to kappa via 2*pi*rate. Returns
// "kappa", "center_time", "amplitude", "offset", "halfwidth_s".
// Throws no_resonance_error when no peak stands above 3x the trace RMS.
FitResult fit_lorentzian(const TimeSeries& trace, double sweep_rate_hz_per_s);

} // namespace optomech

#endif
