#include "optomech/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <sstream>

#include <gsl/gsl_blas.h>
#include <gsl/gsl_cdf.h>
#include <gsl/gsl_matrix.h>
#include <gsl/gsl_multifit_nlinear.h>
#include <gsl/gsl_sf_psi.h>
#include <gsl/gsl_vector.h>

#include "optomech/constants.hpp"
#include "fft.hpp"
#include "linalg.hpp"

namespace optomech {

std::string to_string(WindowKind w) {
  return w == WindowKind::rectangular ? "rectangular" : "hann";
}

namespace {

struct Segmentation {
  std::size_t ls = 0;
  std::size_t hop = 0;
  std::size_t n_seg = 0;
};

Segmentation plan_segments(const TimeSeries& ts, double segment_duration_s, double overlap) {
  if (!(ts.sample_rate > 0.0)) throw std::domain_error("welch: sample rate must be > 0");
  if (!(segment_duration_s > 0.0)) {
    throw std::domain_error("welch: segment duration must be > 0");
  }
  if (!(overlap >= 0.0 && overlap < 1.0)) {
    throw std::domain_error("welch: overlap fraction must lie in [0, 1)");
  }
  Segmentation seg;
  seg.ls = static_cast<std::size_t>(std::llround(segment_duration_s * ts.sample_rate));
  if (seg.ls < 8) throw std::domain_error("welch: segment shorter than 8 samples");
  seg.hop = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(seg.ls) * (1.0 - overlap))));
  const std::size_t n = ts.samples.size();
  if (n < seg.ls) throw std::domain_error("welch: record shorter than one segment");
  seg.n_seg = 1 + (n - seg.ls) / seg.hop;
  if (seg.n_seg < 2) {
    throw std::domain_error("welch: record too short for two segments");
  }
  return seg;
}

std::vector<double> make_window(WindowKind kind, std::size_t ls) {
  std::vector<double> w(ls, 1.0);
  if (kind == WindowKind::hann) {
    for (std::size_t i = 0; i < ls; ++i) {
      w[i] = 0.5 * (1.0 - std::cos(k_two_pi * static_cast<double>(i) / static_cast<double>(ls)));
    }
  }
  return w;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    const double lo = *std::max_element(v.begin(), v.begin() + mid);
    m = 0.5 * (m + lo);
  }
  return m;
}

struct Ols {
  double slope = 0.0;
  double intercept = 0.0;
  double sigma_slope = 0.0;
  double sigma_intercept = 0.0;
  double ssr = 0.0;   // sum of squared residuals
  std::size_t n = 0;
};

Ols ols_fit(const std::vector<double>& x, const std::vector<double>& y) {
  Ols r;
  r.n = x.size();
  const double nd = static_cast<double>(r.n);
  const double xbar = std::accumulate(x.begin(), x.end(), 0.0) / nd;
  const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / nd;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < r.n; ++i) {
    sxx += (x[i] - xbar) * (x[i] - xbar);
    sxy += (x[i] - xbar) * (y[i] - ybar);
  }
  if (!(sxx > 0.0)) throw std::domain_error("ols_fit: degenerate abscissa");
  r.slope = sxy / sxx;
  r.intercept = ybar - r.slope * xbar;
  for (std::size_t i = 0; i < r.n; ++i) {
    const double res = y[i] - (r.intercept + r.slope * x[i]);
    r.ssr += res * res;
  }
  const double var = r.n > 2 ? r.ssr / (nd - 2.0) : 0.0;
  r.sigma_slope = std::sqrt(var / sxx);
  r.sigma_intercept = std::sqrt(var * (1.0 / nd + xbar * xbar / sxx));
  return r;
}

} // namespace

bool FitResult::has(const std::string& name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return true;
  }
  return false;
}

double FitResult::param(const std::string& name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return p.value;
  }
  throw std::invalid_argument("FitResult: unknown parameter '" + name + "'");
}

double FitResult::sigma(const std::string& name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return p.sigma;
  }
  throw std::invalid_argument("FitResult: unknown parameter '" + name + "'");
}

SpectralEstimate welch_asd(const TimeSeries& ts, double segment_duration_s, WindowKind window,
                           double overlap) {
  const Segmentation seg = plan_segments(ts, segment_duration_s, overlap);
  const std::vector<double> w = make_window(window, seg.ls);
  const double sw = std::accumulate(w.begin(), w.end(), 0.0);
  const double sww = std::inner_product(w.begin(), w.end(), w.begin(), 0.0);
  const double fs = ts.sample_rate;

  const std::size_t nbins = seg.ls / 2 + 1;
  std::vector<double> acc(nbins, 0.0);
  std::vector<double> scratch(seg.ls);
  for (std::size_t j = 0; j < seg.n_seg; ++j) {
    const double* block = ts.samples.data() + j * seg.hop;
    for (std::size_t i = 0; i < seg.ls; ++i) scratch[i] = w[i] * block[i];
    const std::vector<std::complex<double>> spec = fft::rfft(scratch);
    for (std::size_t k = 0; k < nbins; ++k) acc[k] += std::norm(spec[k]);
  }

  SpectralEstimate est;
  est.n_segments = seg.n_seg;
  est.window = to_string(window);
  est.segment_duration_s = static_cast<double>(seg.ls) / fs;
  est.enbw_hz = fs * sww / (sw * sw);
  est.grid_hz.resize(nbins);
  est.psd.resize(nbins);
  est.asd.resize(nbins);
  const bool even = seg.ls % 2 == 0;
  const double norm = 1.0 / (static_cast<double>(seg.n_seg) * fs * sww);
  for (std::size_t k = 0; k < nbins; ++k) {
    est.grid_hz[k] = static_cast<double>(k) * fs / static_cast<double>(seg.ls);
    const bool one_sided_pair = k > 0 && !(even && k == nbins - 1);
    est.psd[k] = (one_sided_pair ? 2.0 : 1.0) * acc[k] * norm;
    est.asd[k] = std::sqrt(est.psd[k]);
  }
  return est;
}

std::vector<double> segment_bin_magnitudes(const TimeSeries& ts, double segment_duration_s,
                                           WindowKind window, double overlap, double f_hz) {
  const Segmentation seg = plan_segments(ts, segment_duration_s, overlap);
  const double fs = ts.sample_rate;
  if (!(f_hz >= 0.0) || f_hz > fs / 2.0) {
    throw std::domain_error("segment_bin_magnitudes: frequency outside [0, fs/2]");
  }
  const std::size_t k = static_cast<std::size_t>(
      std::llround(f_hz * static_cast<double>(seg.ls) / fs));
  const std::size_t nbins = seg.ls / 2 + 1;
  if (k >= nbins) throw std::domain_error("segment_bin_magnitudes: bin outside the grid");

  const std::vector<double> w = make_window(window, seg.ls);
  const double sww = std::inner_product(w.begin(), w.end(), w.begin(), 0.0);
  const double scale = std::sqrt(2.0 / (fs * sww));

  std::vector<double> mags(seg.n_seg);
  std::vector<double> scratch(seg.ls);
  for (std::size_t j = 0; j < seg.n_seg; ++j) {
    const double* block = ts.samples.data() + j * seg.hop;
    for (std::size_t i = 0; i < seg.ls; ++i) scratch[i] = w[i] * block[i];
    const std::vector<std::complex<double>> spec = fft::rfft(scratch);
    mags[j] = std::abs(spec[k]) * scale;
  }
  return mags;
}

RayleighTestResult rayleigh_stationarity_test(const std::vector<double>& magnitudes,
                                              double p_threshold) {
  const std::size_t n = magnitudes.size();
  if (n < 20) {
    std::ostringstream msg;
    msg << "rayleigh_stationarity_test: need >= 20 samples, got " << n;
    throw insufficient_data_error(msg.str());
  }
  double ss = 0.0;
  for (double m : magnitudes) {
    if (!std::isfinite(m) || m < 0.0) {
      throw std::domain_error("rayleigh_stationarity_test: magnitudes must be finite and >= 0");
    }
    ss += m * m;
  }
  const std::size_t k = std::max<std::size_t>(5, n / 10);

  RayleighTestResult r;
  r.fitted_scale = std::sqrt(ss / (2.0 * static_cast<double>(n)));
  r.dof = k - 2;
  r.histogram.assign(k, 0);
  if (!(r.fitted_scale > 0.0)) {
    r.histogram[0] = n;
    r.chi2 = std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
    r.stationary = false;
    return r;
  }

  // Equal-probability binning through the fitted Rayleigh CDF: u = 1-exp(-m^2/2s^2).
  const double inv2s2 = 1.0 / (2.0 * r.fitted_scale * r.fitted_scale);
  for (double m : magnitudes) {
    const double u = 1.0 - std::exp(-m * m * inv2s2);
    std::size_t bin = static_cast<std::size_t>(u * static_cast<double>(k));
    if (bin >= k) bin = k - 1;
    r.histogram[bin] += 1;
  }
  const double expected = static_cast<double>(n) / static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double d = static_cast<double>(r.histogram[i]) - expected;
    r.chi2 += d * d / expected;
  }
  r.p_value = gsl_cdf_chisq_Q(r.chi2, static_cast<double>(r.dof));
  r.stationary = r.p_value > p_threshold;
  return r;
}

FitResult fit_slope(const SpectralEstimate& est, double f_lo_hz, double f_hi_hz) {
  if (!(f_lo_hz > 0.0) || !(f_hi_hz > f_lo_hz)) {
    throw std::domain_error("fit_slope: need 0 < f_lo < f_hi");
  }
  if (est.grid_hz.empty() || f_lo_hz > est.grid_hz.back() || f_hi_hz < est.grid_hz.front()) {
    throw std::domain_error("fit_slope: band outside the spectral grid");
  }
  std::vector<double> x, y;
  for (std::size_t i = 0; i < est.grid_hz.size(); ++i) {
    const double f = est.grid_hz[i];
    if (f < f_lo_hz || f > f_hi_hz || !(f > 0.0)) continue;
    if (!(est.asd[i] > 0.0)) continue;
    x.push_back(std::log(f));
    y.push_back(std::log(est.asd[i]));
  }
  if (x.size() < 8) {
    std::ostringstream msg;
    msg << "fit_slope: need >= 8 usable bins in [" << f_lo_hz << ", " << f_hi_hz << "] Hz, got "
        << x.size();
    throw std::domain_error(msg.str());
  }

  // The log of an averaged periodogram bin has variance trigamma(n_seg);
  // ASD is the square root, so a quarter of that. The log bias is common to
  // all bins and lands in the intercept, leaving the slope unbiased.
  const int n_seg = static_cast<int>(std::max<std::size_t>(1, est.n_segments));
  const double var_y = gsl_sf_psi_1_int(n_seg) / 4.0;

  const Ols ols = ols_fit(x, y);
  const double nd = static_cast<double>(ols.n);
  double sxx = 0.0;
  {
    const double xbar = std::accumulate(x.begin(), x.end(), 0.0) / nd;
    for (double xi : x) sxx += (xi - xbar) * (xi - xbar);
  }

  FitResult out;
  out.parameters.push_back({"slope", ols.slope, std::sqrt(var_y / sxx)});
  out.parameters.push_back({"intercept", ols.intercept, ols.sigma_intercept});
  out.residual_stat = ols.ssr / var_y / std::max(1.0, nd - 2.0);
  out.converged = true;
  return out;
}

namespace {

// Weighted non-negative LS over the active-column subset `mask` of the full
// design; returns false when the reduced normal equations are singular or
// the solution leaves the feasible (all >= 0) region.
bool solve_subset(const std::vector<std::array<double, 3>>& rows, const std::vector<double>& y,
                  const std::vector<double>& w, unsigned mask, std::array<double, 3>& coef,
                  double& chi2) {
  std::vector<std::size_t> active;
  for (std::size_t c = 0; c < 3; ++c) {
    if (mask & (1u << c)) active.push_back(c);
  }
  coef = {0.0, 0.0, 0.0};
  const std::size_t k = active.size();
  if (k > 0) {
    std::vector<double> a(k * k, 0.0), b(k, 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t p = 0; p < k; ++p) {
        b[p] += w[i] * rows[i][active[p]] * y[i];
        for (std::size_t q = 0; q < k; ++q) {
          a[p * k + q] += w[i] * rows[i][active[p]] * rows[i][active[q]];
        }
      }
    }
    std::vector<double> sol;
    try {
      sol = solve_dense<double>(a, b);
    } catch (const std::runtime_error&) {
      return false;
    }
    for (std::size_t p = 0; p < k; ++p) {
      if (sol[p] < 0.0) return false;
      coef[active[p]] = sol[p];
    }
  }
  chi2 = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double fit = coef[0] * rows[i][0] + coef[1] * rows[i][1] + coef[2] * rows[i][2];
    chi2 += w[i] * (y[i] - fit) * (y[i] - fit);
  }
  return true;
}

} // namespace

FitResult fit_power_dependence(const std::vector<PowerPointSample>& points,
                               const PowerFitHypotheses& hypotheses) {
  std::vector<double> distinct;
  for (const auto& p : points) {
    if (p.p_in < 0.0) throw std::domain_error("fit_power_dependence: negative power");
    if (std::find(distinct.begin(), distinct.end(), p.p_in) == distinct.end()) {
      distinct.push_back(p.p_in);
    }
  }
  if (distinct.size() < 4) {
    throw std::domain_error("fit_power_dependence: need >= 4 distinct powers");
  }
  const std::size_t n = points.size();

  std::vector<std::array<double, 3>> rows(n);
  std::vector<double> y(n), w(n);
  bool weighted = true;
  double y_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rows[i] = {1.0, points[i].p_in, points[i].p_in * points[i].p_in};
    y[i] = points[i].asd * points[i].asd;
    y_max = std::max(y_max, std::abs(y[i]));
    const double sy = 2.0 * points[i].asd * points[i].asd_sigma;
    if (!(sy > 0.0)) weighted = false;
    w[i] = sy > 0.0 ? 1.0 / (sy * sy) : 1.0;
  }
  if (!weighted) std::fill(w.begin(), w.end(), 1.0);

  FitResult out;
  if (y_max == 0.0) {
    out.parameters.push_back({"c0", 0.0, 0.0});
    out.parameters.push_back({"c1", 0.0, 0.0});
    out.parameters.push_back({"c2", 0.0, 0.0});
    out.parameters.push_back({"n_clamped", 0.0, 0.0});
    out.parameters.push_back({"chi2_viscous_floor", 0.0, 0.0});
    out.parameters.push_back({"chi2_structure_floor", 0.0, 0.0});
    out.parameters.push_back({"delta_chi2", 0.0, 0.0});
    out.converged = true;
    return out;
  }

  // Best feasible subset = exact non-negative least squares for 3 columns.
  std::array<double, 3> best = {0.0, 0.0, 0.0};
  double best_chi2 = std::numeric_limits<double>::infinity();
  unsigned best_mask = 0;
  for (unsigned mask = 0; mask < 8; ++mask) {
    std::array<double, 3> coef;
    double chi2;
    if (!solve_subset(rows, y, w, mask, coef, chi2)) continue;
    if (!std::isfinite(best_chi2) || chi2 < best_chi2 - 1e-12 * std::abs(best_chi2)) {
      best_chi2 = chi2;
      best = coef;
      best_mask = mask;
    }
  }
  if (!std::isfinite(best_chi2)) {
    throw std::runtime_error("fit_power_dependence: all candidate fits singular");
  }
  const int n_active = __builtin_popcount(best_mask);
  const int n_clamped = 3 - n_active;

  // One-sigma from the unconstrained covariance (XtWX)^-1; for unweighted
  // input it is scaled by the residual variance estimate.
  std::array<double, 3> sig = {0.0, 0.0, 0.0};
  {
    std::vector<double> a(9, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t p = 0; p < 3; ++p) {
        for (std::size_t q = 0; q < 3; ++q) {
          a[p * 3 + q] += w[i] * rows[i][p] * rows[i][q];
        }
      }
    }
    try {
      for (std::size_t p = 0; p < 3; ++p) {
        std::vector<double> e(3, 0.0);
        e[p] = 1.0;
        const std::vector<double> col = solve_dense<double>(a, e);
        double v = col[p];
        if (!weighted && n > 3) v *= best_chi2 / (static_cast<double>(n) - 3.0);
        sig[p] = v > 0.0 ? std::sqrt(v) : 0.0;
      }
    } catch (const std::runtime_error&) {
      // leave zero sigmas; covariance singular
    }
  }

  // Hypothesis comparison: refit with the floor pinned and only the power
  // terms free, under the same non-negativity rule.
  auto floor_chi2 = [&](double floor_psd) {
    std::vector<double> y2(n);
    for (std::size_t i = 0; i < n; ++i) y2[i] = y[i] - floor_psd;
    double best2 = std::numeric_limits<double>::infinity();
    for (unsigned mask = 0; mask < 4; ++mask) {  // subsets of {c1, c2}
      std::array<double, 3> coef;
      double chi2;
      if (!solve_subset(rows, y2, w, mask << 1, coef, chi2)) continue;
      best2 = std::min(best2, chi2);
    }
    return best2;
  };
  const double chi2_v = floor_chi2(hypotheses.viscous_floor_psd);
  const double chi2_s = floor_chi2(hypotheses.structure_floor_psd);

  out.parameters.push_back({"c0", best[0], sig[0]});
  out.parameters.push_back({"c1", best[1], sig[1]});
  out.parameters.push_back({"c2", best[2], sig[2]});
  out.parameters.push_back({"n_clamped", static_cast<double>(n_clamped), 0.0});
  out.parameters.push_back({"chi2_viscous_floor", chi2_v, 0.0});
  out.parameters.push_back({"chi2_structure_floor", chi2_s, 0.0});
  out.parameters.push_back({"delta_chi2", chi2_v - chi2_s, 0.0});
  out.residual_stat =
      best_chi2 / std::max(1.0, static_cast<double>(n) - static_cast<double>(n_active));
  out.converged = true;
  return out;
}

FitResult fit_ringdown(const RingdownSeries& envelopes) {
  const std::size_t n_env = envelopes.i_env.size();
  if (n_env < 4 || envelopes.q_env.size() != n_env) {
    throw insufficient_data_error("fit_ringdown: envelope too short");
  }
  const std::size_t step = std::max<std::size_t>(1, envelopes.lowpass_len);

  // Decimate to roughly independent samples and unwrap the phase.
  std::vector<double> t, a, phi;
  double prev_phi = 0.0;
  for (std::size_t j = 0; j < n_env; j += step) {
    const double i_v = envelopes.i_env[j];
    const double q_v = envelopes.q_env[j];
    const double mag = std::hypot(i_v, q_v);
    double ph = std::atan2(q_v, i_v);
    if (!t.empty()) {
      while (ph - prev_phi > k_pi) ph -= k_two_pi;
      while (ph - prev_phi < -k_pi) ph += k_two_pi;
    }
    prev_phi = ph;
    t.push_back(envelopes.envelope_t0 + static_cast<double>(j) * envelopes.envelope_dt);
    a.push_back(mag);
    phi.push_back(ph);
  }
  if (a.size() < 4) throw insufficient_data_error("fit_ringdown: too few decimated samples");

  // Noise floor from the scatter of successive differences (median absolute
  // deviation scaled for Gaussian noise; /sqrt(2) for the differencing).
  std::vector<double> diffs;
  for (std::size_t i = 1; i < a.size(); ++i) diffs.push_back(std::abs(a[i] - a[i - 1]));
  const double noise_floor = 1.4826 * median_of(diffs) / std::sqrt(2.0);
  const double cut = 3.0 * noise_floor;

  std::vector<double> tf, lf, pf;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > cut && a[i] > 0.0) {
      tf.push_back(t[i]);
      lf.push_back(std::log(a[i]));
      pf.push_back(phi[i]);
    }
  }
  if (tf.size() < 4) {
    throw insufficient_data_error("fit_ringdown: envelope below the noise floor");
  }

  const Ols log_fit = ols_fit(tf, lf);
  const Ols phase_fit = ols_fit(tf, pf);
  const double lambda = -log_fit.slope;
  const double sigma_lambda = log_fit.sigma_slope;
  const double omega_hat = envelopes.demod_omega + phase_fit.slope;

  FitResult out;
  out.residual_stat =
      log_fit.ssr / std::max(1.0, static_cast<double>(log_fit.n) - 2.0);
  const bool decaying = lambda > 0.0 && std::isfinite(lambda) && lambda > 2.0 * sigma_lambda;
  double q_val = std::numeric_limits<double>::infinity();
  double q_sig = std::numeric_limits<double>::infinity();
  if (lambda > 0.0) {
    q_val = omega_hat / (2.0 * lambda);
    q_sig = q_val * std::sqrt(sigma_lambda * sigma_lambda / (lambda * lambda) +
                              std::pow(phase_fit.sigma_slope / omega_hat, 2.0));
  }
  out.converged = decaying && q_val < 1e12;
  out.parameters.push_back({"q", q_val, q_sig});
  out.parameters.push_back({"omega_m", omega_hat, phase_fit.sigma_slope});
  out.parameters.push_back({"decay_rate", lambda, sigma_lambda});
  out.parameters.push_back({"amplitude", std::exp(log_fit.intercept), 0.0});
  return out;
}

RingdownTrials ringdown_trials(double omega_m, double quality_factor, double amplitude,
                               double fs, double duration, double additive_noise_rms,
                               std::uint64_t base_seed, std::size_t n_trials,
                               double lowpass_bw_hz) {
  if (n_trials < 2) throw std::domain_error("ringdown_trials: need >= 2 trials");
  RingdownTrials out;
  for (std::size_t trial = 0; trial < n_trials; ++trial) {
    const RingdownSeries rd =
        ringdown_series(omega_m, quality_factor, amplitude, fs, duration, additive_noise_rms,
                        base_seed + trial, lowpass_bw_hz);
    const FitResult fit = fit_ringdown(rd);
    if (!fit.converged) continue;
    out.q_values.push_back(fit.param("q"));
    out.q_sigmas.push_back(fit.sigma("q"));
  }
  const std::size_t m = out.q_values.size();
  if (m < 2) throw std::runtime_error("ringdown_trials: fewer than two trials converged");
  const double md = static_cast<double>(m);
  out.mean_q = std::accumulate(out.q_values.begin(), out.q_values.end(), 0.0) / md;
  double ssd = 0.0, mean_var = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    ssd += (out.q_values[i] - out.mean_q) * (out.q_values[i] - out.mean_q);
    mean_var += out.q_sigmas[i] * out.q_sigmas[i];
  }
  mean_var /= md;
  out.sigma_q = std::sqrt(ssd / (md - 1.0));
  // Scatter-vs-reported-uncertainty consistency: (m-1)s^2/sigma^2 ~ chi^2.
  const double stat = ssd / mean_var;
  const double q_tail = gsl_cdf_chisq_Q(stat, md - 1.0);
  out.consistency_p = 2.0 * std::min(q_tail, 1.0 - q_tail);
  return out;
}

namespace {

struct LorentzianData {
  const std::vector<double>* t;
  const std::vector<double>* y;
};

int lorentzian_f(const gsl_vector* p, void* data, gsl_vector* f) {
  const auto* d = static_cast<const LorentzianData*>(data);
  const double off = gsl_vector_get(p, 0);
  const double amp = gsl_vector_get(p, 1);
  const double t0 = gsl_vector_get(p, 2);
  const double w = gsl_vector_get(p, 3);
  for (std::size_t i = 0; i < d->t->size(); ++i) {
    const double u = ((*d->t)[i] - t0) / w;
    gsl_vector_set(f, i, off + amp / (1.0 + u * u) - (*d->y)[i]);
  }
  return GSL_SUCCESS;
}

int lorentzian_df(const gsl_vector* p, void* data, gsl_matrix* jac) {
  const auto* d = static_cast<const LorentzianData*>(data);
  const double amp = gsl_vector_get(p, 1);
  const double t0 = gsl_vector_get(p, 2);
  const double w = gsl_vector_get(p, 3);
  for (std::size_t i = 0; i < d->t->size(); ++i) {
    const double u = ((*d->t)[i] - t0) / w;
    const double den = 1.0 + u * u;
    gsl_matrix_set(jac, i, 0, 1.0);
    gsl_matrix_set(jac, i, 1, 1.0 / den);
    gsl_matrix_set(jac, i, 2, 2.0 * amp * u / (w * den * den));
    gsl_matrix_set(jac, i, 3, 2.0 * amp * u * u / (w * den * den));
  }
  return GSL_SUCCESS;
}

} // namespace

FitResult fit_lorentzian(const TimeSeries& trace, double sweep_rate_hz_per_s) {
  const std::size_t n = trace.samples.size();
  if (n < 16) throw std::domain_error("fit_lorentzian: trace too short");
  if (!(sweep_rate_hz_per_s > 0.0)) {
    throw std::domain_error("fit_lorentzian: sweep rate must be > 0");
  }
  const double fs = trace.sample_rate;
  if (!(fs > 0.0)) throw std::domain_error("fit_lorentzian: sample rate must be > 0");

  const double med = median_of(trace.samples);
  double rms = 0.0;
  for (double x : trace.samples) rms += (x - med) * (x - med);
  rms = std::sqrt(rms / static_cast<double>(n));

  // Peak detection on a lightly smoothed copy so lone noise excursions do
  // not count as a resonance.
  const std::size_t lw = std::max<std::size_t>(3, n / 100);
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + trace.samples[i];
  const std::size_t n_sm = n - lw + 1;
  std::size_t peak_idx = 0;
  double peak_val = -std::numeric_limits<double>::infinity();
  std::vector<double> sm(n_sm);
  for (std::size_t i = 0; i < n_sm; ++i) {
    sm[i] = (cum[i + lw] - cum[i]) / static_cast<double>(lw);
    if (sm[i] > peak_val) {
      peak_val = sm[i];
      peak_idx = i;
    }
  }
  if (!(peak_val - med > 3.0 * rms)) {
    std::ostringstream msg;
    msg << "fit_lorentzian: no resonance (smoothed peak excess " << peak_val - med
        << " <= 3x trace rms " << 3.0 * rms << ")";
    throw no_resonance_error(msg.str());
  }

  // Initial guesses from the half-maximum crossings of the smoothed trace.
  const double half = med + 0.5 * (peak_val - med);
  std::size_t left = peak_idx, right = peak_idx;
  while (left > 0 && sm[left] > half) --left;
  while (right + 1 < n_sm && sm[right] > half) ++right;
  const double t0_init =
      (static_cast<double>(peak_idx) + 0.5 * static_cast<double>(lw - 1)) / fs;
  const double w_init =
      std::max(0.5 * static_cast<double>(right - left) / fs, 2.0 / fs);

  // Normalize amplitudes so convergence (and hence kappa) is exactly
  // invariant under rescaling of the input trace.
  const double scale = peak_val - med;
  std::vector<double> tv(n), yv(n);
  for (std::size_t i = 0; i < n; ++i) {
    tv[i] = static_cast<double>(i) / fs;
    yv[i] = (trace.samples[i] - med) / scale;
  }

  LorentzianData data{&tv, &yv};
  gsl_multifit_nlinear_fdf fdf;
  fdf.f = lorentzian_f;
  fdf.df = lorentzian_df;
  fdf.fvv = nullptr;
  fdf.n = n;
  fdf.p = 4;
  fdf.params = &data;

  gsl_multifit_nlinear_parameters params = gsl_multifit_nlinear_default_parameters();
  gsl_multifit_nlinear_workspace* ws =
      gsl_multifit_nlinear_alloc(gsl_multifit_nlinear_trust, &params, n, 4);
  if (!ws) throw std::runtime_error("fit_lorentzian: workspace allocation failed");

  double init[4] = {0.0, 1.0, t0_init, w_init};
  gsl_vector_view x0 = gsl_vector_view_array(init, 4);
  gsl_multifit_nlinear_init(&x0.vector, &fdf, ws);
  int info = 0;
  const int status =
      gsl_multifit_nlinear_driver(200, 1e-12, 1e-12, 0.0, nullptr, nullptr, &info, ws);

  gsl_vector* sol = gsl_multifit_nlinear_position(ws);
  const double off_n = gsl_vector_get(sol, 0);
  const double amp_n = gsl_vector_get(sol, 1);
  const double t0 = gsl_vector_get(sol, 2);
  const double w_fit = std::abs(gsl_vector_get(sol, 3));

  double chi2 = 0.0;
  gsl_vector* resid = gsl_multifit_nlinear_residual(ws);
  gsl_blas_ddot(resid, resid, &chi2);

  gsl_matrix* covar = gsl_matrix_alloc(4, 4);
  gsl_multifit_nlinear_covar(gsl_multifit_nlinear_jac(ws), 0.0, covar);
  const double dof = std::max(1.0, static_cast<double>(n) - 4.0);
  const double var_scale = chi2 / dof;
  auto sigma_of = [&](std::size_t i) {
    const double v = gsl_matrix_get(covar, i, i) * var_scale;
    return v > 0.0 ? std::sqrt(v) : 0.0;
  };
  const double sigma_off = sigma_of(0) * scale;
  const double sigma_amp = sigma_of(1) * scale;
  const double sigma_t0 = sigma_of(2);
  const double sigma_w = sigma_of(3);
  gsl_matrix_free(covar);
  gsl_multifit_nlinear_free(ws);

  const double kappa = k_two_pi * sweep_rate_hz_per_s * w_fit;

  FitResult out;
  out.converged = status == GSL_SUCCESS;
  out.residual_stat = chi2 * scale * scale / dof;
  out.parameters.push_back({"kappa", kappa, k_two_pi * sweep_rate_hz_per_s * sigma_w});
  out.parameters.push_back({"center_time", t0, sigma_t0});
  out.parameters.push_back({"amplitude", amp_n * scale, sigma_amp});
  out.parameters.push_back({"offset", off_n * scale + med, sigma_off});
  out.parameters.push_back({"halfwidth_s", w_fit, sigma_w});
  return out;
}

} // namespace optomech
