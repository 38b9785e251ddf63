#include "optomech/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace optomech::io {

namespace {

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw io_error("cannot open for writing: " + path);
  return out;
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(buf), 8);
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  if (!in) throw io_error("unexpected end of binary time series");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}

double get_f64(std::istream& in) {
  const std::uint64_t bits = get_u64(in);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

} // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_timeseries_csv(const std::string& path, const TimeSeries& ts) {
  std::ofstream out = open_out(path);
  out << "time_s,value\n";
  const double dt = 1.0 / ts.sample_rate;
  for (std::size_t i = 0; i < ts.samples.size(); ++i) {
    out << format_double(static_cast<double>(i) * dt) << ','
        << format_double(ts.samples[i]) << '\n';
  }
  if (!out) throw io_error("write failure: " + path);
}

void write_timeseries_bin(const std::string& path, const TimeSeries& ts) {
  std::ofstream out = open_out(path, std::ios::out | std::ios::binary);
  put_f64(out, ts.sample_rate);
  put_u64(out, ts.samples.size());
  put_u64(out, ts.seed);
  for (double s : ts.samples) put_f64(out, s);
  if (!out) throw io_error("write failure: " + path);
}

TimeSeries read_timeseries_bin(const std::string& path) {
  std::ifstream in(path, std::ios::in | std::ios::binary);
  if (!in) throw io_error("cannot open for reading: " + path);
  TimeSeries ts;
  ts.sample_rate = get_f64(in);
  const std::uint64_t n = get_u64(in);
  ts.seed = get_u64(in);
  if (n > (std::uint64_t(1) << 32)) throw io_error("binary time series header corrupt: " + path);
  ts.samples.resize(static_cast<std::size_t>(n));
  for (auto& s : ts.samples) s = get_f64(in);
  ts.provenance = "read from " + path;
  return ts;
}

void write_timeseries_json(const std::string& path, const TimeSeries& ts) {
  nlohmann::json j;
  j["sample_rate_hz"] = ts.sample_rate;
  j["seed"] = ts.seed;
  j["provenance"] = ts.provenance;
  j["samples"] = ts.samples;
  write_json(path, j);
}

void write_budget_csv(const std::string& path, const NoiseBudget& budget) {
  static const char* columns[] = {"qba", "classical", "thermal", "sensing", "phase"};
  std::ofstream out = open_out(path);
  out << "frequency_hz,asd_total";
  for (const char* c : columns) out << ",asd_" << c;
  out << '\n';
  for (std::size_t i = 0; i < budget.grid_hz.size(); ++i) {
    out << format_double(budget.grid_hz[i]) << ','
        << format_double(std::sqrt(2.0 * budget.total[i]));
    for (const char* c : columns) {
      const auto it = budget.per_source.find(c);
      const double psd = it != budget.per_source.end() ? it->second[i] : 0.0;
      out << ',' << format_double(std::sqrt(2.0 * psd));
    }
    out << '\n';
  }
  if (!out) throw io_error("write failure: " + path);
}

nlohmann::json budget_to_json(const NoiseBudget& budget) {
  nlohmann::json j;
  j["grid_hz"] = budget.grid_hz;
  nlohmann::json sources;
  for (const auto& [name, col] : budget.per_source) {
    nlohmann::json asd = nlohmann::json::array();
    for (double psd : col) asd.push_back(std::sqrt(2.0 * psd));
    sources["asd_" + name] = std::move(asd);
  }
  j["sources"] = std::move(sources);
  nlohmann::json total = nlohmann::json::array();
  for (double psd : budget.total) total.push_back(std::sqrt(2.0 * psd));
  j["asd_total"] = std::move(total);
  j["metadata"] = budget.metadata;
  return j;
}

void write_spectrum_csv(const std::string& path, const SpectralEstimate& est) {
  std::ofstream out = open_out(path);
  out << "frequency_hz,asd,psd,n_segments\n";
  for (std::size_t i = 0; i < est.grid_hz.size(); ++i) {
    out << format_double(est.grid_hz[i]) << ',' << format_double(est.asd[i]) << ','
        << format_double(est.psd[i]) << ',' << est.n_segments << '\n';
  }
  if (!out) throw io_error("write failure: " + path);
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw io_error("write failure: " + path);
}

} // namespace optomech::io
