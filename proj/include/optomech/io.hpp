#ifndef OPTOMECH_IO_HPP
#define OPTOMECH_IO_HPP

#include <string>

#include <nlohmann/json.hpp>

#include "optomech/noisebudget.hpp"
#include "optomech/spectral.hpp"
#include "optomech/synth.hpp"

namespace optomech::io {

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// All text output renders doubles with %.17g so reruns are byte-identical.
std::string format_double(double v);

// CSV with a "time_s,value" header.
void write_timeseries_csv(const std::string& path, const TimeSeries& ts);

// Little-endian binary: f64 sample_rate, u64 length, u64 seed, f64 samples.
void write_timeseries_bin(const std::string& path, const TimeSeries& ts);
TimeSeries read_timeseries_bin(const std::string& path);

// TimeSeries as JSON ({"sample_rate_hz","seed","provenance","samples"}).
void write_timeseries_json(const std::string& path, const TimeSeries& ts);

// Budget CSV: frequency_hz, asd_total, asd_qba, asd_classical, asd_thermal,
// asd_sensing, asd_phase -- single-sided ASDs, sqrt(2*PSD).
void write_budget_csv(const std::string& path, const NoiseBudget& budget);
nlohmann::json budget_to_json(const NoiseBudget& budget);

// Spectral estimate CSV: frequency_hz, asd, psd, n_segments.
void write_spectrum_csv(const std::string& path, const SpectralEstimate& est);

void write_json(const std::string& path, const nlohmann::json& j);

} // namespace optomech::io

#endif
