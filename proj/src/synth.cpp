#include "optomech/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "optomech/constants.hpp"
#include "optomech/rng.hpp"
#include "fft.hpp"
#include "parallel.hpp"

namespace optomech {

namespace {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 16;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> eval_target(const PsdCurve& target, double fs, std::size_t m) {
  std::vector<double> s(m / 2 + 1);
  for (std::size_t k = 0; k <= m / 2; ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(m);
    const double v = target(f);
    if (std::isnan(v)) {
      std::ostringstream msg;
      msg << "colored_noise: target PSD undefined at " << f << " Hz";
      throw std::domain_error(msg.str());
    }
    if (v < 0.0) {
      std::ostringstream msg;
      msg << "colored_noise: negative target PSD at " << f << " Hz";
      throw std::domain_error(msg.str());
    }
    s[k] = v;
  }
  return s;
}

// One block of length m whose rfft coefficients are independent complex
// Gaussians with E|X_k|^2 = S1(f_k)*fs*m/2. The DC bin is forced to zero
// (records are mean-free, which also sidesteps 1/f targets at f=0); the
// Nyquist bin is real with the full bin variance in its one component.
std::vector<double> synth_block(const std::vector<double>& s1, double fs, std::size_t m,
                                SplitMix64& rng) {
  std::vector<std::complex<double>> spec(m / 2 + 1, 0.0);
  const double md = static_cast<double>(m);
  for (std::size_t k = 1; k < m / 2; ++k) {
    const double sigma = std::sqrt(s1[k] * fs * md / 4.0);
    const double re = rng.next_gaussian();
    const double im = rng.next_gaussian();
    spec[k] = std::complex<double>(sigma * re, sigma * im);
  }
  const double sigma_nyq = std::sqrt(s1[m / 2] * fs * md / 2.0);
  spec[m / 2] = std::complex<double>(sigma_nyq * rng.next_gaussian(), 0.0);
  std::vector<double> block = fft::irfft(spec, m);
  for (double& x : block) x /= md;
  return block;
}

} // namespace

TimeSeries colored_noise(const PsdCurve& target_psd, double fs, double duration,
                         std::uint64_t seed, std::size_t max_block, unsigned jobs) {
  if (!(fs > 0.0)) throw std::domain_error("colored_noise: sample rate must be > 0");
  if (!(duration > 0.0)) throw std::domain_error("colored_noise: duration must be > 0");
  if (max_block < 32 || (max_block & (max_block - 1)) != 0) {
    throw std::invalid_argument("colored_noise: max_block must be a power of two >= 32");
  }
  const std::size_t n = static_cast<std::size_t>(std::llround(duration * fs));
  if (n < 16) throw std::domain_error("colored_noise: duration*fs must be >= 16 samples");

  TimeSeries ts;
  ts.sample_rate = fs;
  ts.seed = seed;
  ts.samples.assign(n, 0.0);

  const std::size_t single = next_pow2(n);
  std::size_t blocks = 1;
  if (single <= max_block) {
    const std::vector<double> s1 = eval_target(target_psd, fs, single);
    SplitMix64 rng(SplitMix64::mix(seed, 0));
    const std::vector<double> block = synth_block(s1, fs, single, rng);
    std::copy(block.begin(), block.begin() + n, ts.samples.begin());
  } else {
    // 50% overlap-add stitching: sine windows satisfy w^2[t] + w^2[t+H] = 1,
    // so summing independent Gaussian blocks preserves the target PSD. The
    // first H positions see only one block and are discarded as warm-up.
    const std::size_t m = max_block;
    const std::size_t h = m / 2;
    const std::vector<double> s1 = eval_target(target_psd, fs, m);
    std::vector<double> w(m);
    for (std::size_t i = 0; i < m; ++i) {
      w[i] = std::sin(k_pi * (static_cast<double>(i) + 0.5) / static_cast<double>(m));
    }
    blocks = (n + h - 1) / h + 1;
    auto add_block = [&](std::size_t j) {
      SplitMix64 rng(SplitMix64::mix(seed, j));
      const std::vector<double> block = synth_block(s1, fs, m, rng);
      const std::size_t start = j * h;  // absolute position of block sample 0
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t p = start + i;
        if (p < h) continue;
        const std::size_t t = p - h;
        if (t >= n) break;
        ts.samples[t] += w[i] * block[i];
      }
    };
    // Only adjacent blocks overlap; running even then odd indices keeps the
    // parallel case race-free and the output independent of thread count.
    const std::size_t n_even = (blocks + 1) / 2;
    const std::size_t n_odd = blocks / 2;
    parallel_for(n_even, jobs, [&](std::size_t i) { add_block(2 * i); });
    parallel_for(n_odd, jobs, [&](std::size_t i) { add_block(2 * i + 1); });
  }

  std::ostringstream prov;
  prov << std::setprecision(17) << "colored_noise(fs=" << fs << ",n=" << n
       << ",blocks=" << blocks << ",window=sine,overlap=0.5,prng="
       << SplitMix64::algorithm_name() << ",seed=" << seed << ")";
  ts.provenance = prov.str();
  return ts;
}

RingdownSeries ringdown_series(double omega_m, double quality_factor, double amplitude,
                               double fs, double duration, double additive_noise_rms,
                               std::uint64_t seed, double lowpass_bw_hz) {
  if (!(omega_m > 0.0)) throw std::domain_error("ringdown_series: omega_m must be > 0");
  if (!(quality_factor > 0.5)) {
    throw std::domain_error("ringdown_series: Q must exceed 1/2 (underdamped)");
  }
  if (!(fs > 4.0 * omega_m / k_two_pi)) {
    throw std::domain_error("ringdown_series: sample rate must exceed 4x the mechanical frequency");
  }
  if (additive_noise_rms < 0.0) {
    throw std::domain_error("ringdown_series: noise rms must be >= 0");
  }
  const std::size_t n = static_cast<std::size_t>(std::llround(duration * fs));
  if (n < 16) throw std::domain_error("ringdown_series: duration*fs must be >= 16 samples");

  const double bw = lowpass_bw_hz > 0.0 ? lowpass_bw_hz : 0.1 * omega_m / k_two_pi;
  const std::size_t lp =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fs / (2.0 * bw))));
  if (lp >= n) {
    throw std::domain_error("ringdown_series: record shorter than the demodulation low-pass");
  }

  RingdownSeries out;
  out.ts.sample_rate = fs;
  out.ts.seed = seed;
  out.ts.samples.resize(n);
  out.demod_omega = omega_m;
  out.lowpass_bw_hz = bw;
  out.lowpass_len = lp;

  SplitMix64 rng(SplitMix64::mix(seed, SplitMix64::stream_index("ringdown")));
  const double decay = omega_m / (2.0 * quality_factor);
  std::vector<double> i_raw(n), q_raw(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / fs;
    const double x = amplitude * std::exp(-decay * t) * std::cos(omega_m * t) +
                     additive_noise_rms * rng.next_gaussian();
    out.ts.samples[k] = x;
    i_raw[k] = 2.0 * x * std::cos(omega_m * t);
    q_raw[k] = -2.0 * x * std::sin(omega_m * t);
  }

  // Centered moving average; the 2*omega component of the mixdown lands on a
  // null of the box response when the length spans whole carrier periods.
  std::vector<double> ci(n + 1, 0.0), cq(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    ci[k + 1] = ci[k] + i_raw[k];
    cq[k + 1] = cq[k] + q_raw[k];
  }
  const std::size_t n_env = n - lp + 1;
  out.i_env.resize(n_env);
  out.q_env.resize(n_env);
  const double inv = 1.0 / static_cast<double>(lp);
  for (std::size_t j = 0; j < n_env; ++j) {
    out.i_env[j] = (ci[j + lp] - ci[j]) * inv;
    out.q_env[j] = (cq[j + lp] - cq[j]) * inv;
  }
  out.envelope_t0 = static_cast<double>(lp - 1) / (2.0 * fs);
  out.envelope_dt = 1.0 / fs;

  std::ostringstream prov;
  prov << std::setprecision(17) << "ringdown(omega_m=" << omega_m << ",Q=" << quality_factor
       << ",A=" << amplitude << ",fs=" << fs << ",n=" << n << ",noise=" << additive_noise_rms
       << ",lowpass_len=" << lp << ",prng=" << SplitMix64::algorithm_name()
       << ",seed=" << seed << ")";
  out.ts.provenance = prov.str();
  return out;
}

LorentzianSweep lorentzian_sweep(double kappa, double sweep_rate_hz_per_s, double fs,
                                 double noise_rms, std::uint64_t seed,
                                 double span_half_widths) {
  if (!(kappa > 0.0)) throw std::domain_error("lorentzian_sweep: kappa must be > 0");
  if (!(sweep_rate_hz_per_s > 0.0)) {
    throw std::domain_error("lorentzian_sweep: sweep rate must be > 0");
  }
  if (!(fs > 0.0)) throw std::domain_error("lorentzian_sweep: sample rate must be > 0");
  if (!(span_half_widths > 0.0)) {
    throw std::domain_error("lorentzian_sweep: span must be > 0");
  }
  if (noise_rms < 0.0) throw std::domain_error("lorentzian_sweep: noise rms must be >= 0");

  const double hw_hz = kappa / k_two_pi;
  const double t_total = 2.0 * span_half_widths * hw_hz / sweep_rate_hz_per_s;
  const std::size_t n = static_cast<std::size_t>(std::llround(t_total * fs));
  if (n < 16) {
    throw std::domain_error("lorentzian_sweep: sweep too short for the sample rate");
  }

  LorentzianSweep out;
  out.sweep_rate = sweep_rate_hz_per_s;
  out.center_time = t_total / 2.0;
  out.adiabatic = sweep_rate_hz_per_s <= 0.01 * hw_hz * hw_hz;
  if (!out.adiabatic) {
    std::fprintf(stderr,
                 "warning: sweep rate %.3g Hz/s is not adiabatic for half linewidth %.3g Hz "
                 "(limit 0.01*(kappa/2pi)^2 = %.3g Hz/s); trace produced anyway\n",
                 sweep_rate_hz_per_s, hw_hz, 0.01 * hw_hz * hw_hz);
  }

  out.ts.sample_rate = fs;
  out.ts.seed = seed;
  out.ts.samples.resize(n);
  SplitMix64 rng(SplitMix64::mix(seed, SplitMix64::stream_index("lorentzian_sweep")));
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / fs;
    const double delta = k_two_pi * sweep_rate_hz_per_s * (t - out.center_time);
    const double d = delta / kappa;
    out.ts.samples[k] = 1.0 / (1.0 + d * d) + noise_rms * rng.next_gaussian();
  }

  std::ostringstream prov;
  prov << std::setprecision(17) << "lorentzian_sweep(kappa=" << kappa
       << ",rate=" << sweep_rate_hz_per_s << ",fs=" << fs << ",n=" << n
       << ",noise=" << noise_rms << ",prng=" << SplitMix64::algorithm_name()
       << ",seed=" << seed << ")";
  out.ts.provenance = prov.str();
  return out;
}

} // namespace optomech
