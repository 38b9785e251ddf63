#ifndef OPTOMECH_SYNTH_HPP
#define OPTOMECH_SYNTH_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace optomech {

struct TimeSeries {
  std::vector<double> samples;
  double sample_rate = 0.0;    // Hz
  std::uint64_t seed = 0;
  std::string provenance;      // generating model, parameters, PRNG name
};

// One-sided PSD as a function of frequency in Hz, defined on [0, fs/2].
using PsdCurve = std::function<double(double)>;

// Stationary Gaussian noise with the given one-sided target PSD, produced by
// frequency-domain synthesis. Records longer than max_block samples are
// stitched from 50%-overlapping sine-windowed blocks; the result is
// deterministic in (seed, parameters) regardless of jobs.
TimeSeries colored_noise(const PsdCurve& target_psd, double fs, double duration,
                         std::uint64_t seed, std::size_t max_block = std::size_t(1) << 20,
                         unsigned jobs = 1);

// Free decay of the pendulum plus its I/Q demodulated envelopes.
struct RingdownSeries {
  TimeSeries ts;
  std::vector<double> i_env;   // in-phase envelope after low-pass
  std::vector<double> q_env;   // quadrature envelope
  double envelope_t0 = 0.0;    // time of i_env[0], s (low-pass group delay)
  double envelope_dt = 0.0;    // envelope sample spacing, s
  double demod_omega = 0.0;    // rad/s
  double lowpass_bw_hz = 0.0;
  std::size_t lowpass_len = 0; // moving-average length, samples
};

// x(t) = amplitude*exp(-omega_m*t/(2Q))*cos(omega_m*t) + white noise.
// lowpass_bw_hz = 0 selects the default 0.1*omega_m/(2*pi).
RingdownSeries ringdown_series(double omega_m, double quality_factor, double amplitude,
                               double fs, double duration, double additive_noise_rms,
                               std::uint64_t seed, double lowpass_bw_hz = 0.0);

// Transmitted power while the laser sweeps across the resonance.
struct LorentzianSweep {
  TimeSeries ts;
  double center_time = 0.0;    // s, resonance crossing
  double sweep_rate = 0.0;     // Hz/s
  bool adiabatic = true;
};

// P(t) = 1/(1 + (delta(t)/kappa)^2) + noise, delta swept linearly through
// zero at sweep_rate Hz/s covering +-span_half_widths half linewidths.
// Warns on stderr when the sweep is too fast to be adiabatic.
LorentzianSweep lorentzian_sweep(double kappa, double sweep_rate_hz_per_s, double fs,
                                 double noise_rms, std::uint64_t seed,
                                 double span_half_widths = 10.0);

} // namespace optomech

#endif
