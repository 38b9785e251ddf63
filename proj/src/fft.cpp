#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace optomech::fft {

namespace {

// Plans are cached per size and reused through the new-array execute API.
// FFTW_UNALIGNED keeps the plans valid for whatever buffers callers hand in;
// plan creation is the only part of FFTW that is not thread-safe, hence the
// mutex around cache fills.
std::mutex g_plan_mutex;

fftw_plan r2c_plan(std::size_t n) {
  static std::map<std::size_t, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<double> in(n);
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_plan p = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                     reinterpret_cast<fftw_complex*>(out.data()),
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!p) throw std::runtime_error("fftw_plan_dft_r2c_1d failed");
  cache.emplace(n, p);
  return p;
}

fftw_plan c2r_plan(std::size_t n) {
  static std::map<std::size_t, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<std::complex<double>> in(n / 2 + 1);
  std::vector<double> out(n);
  fftw_plan p = fftw_plan_dft_c2r_1d(static_cast<int>(n),
                                     reinterpret_cast<fftw_complex*>(in.data()), out.data(),
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!p) throw std::runtime_error("fftw_plan_dft_c2r_1d failed");
  cache.emplace(n, p);
  return p;
}

} // namespace

std::vector<std::complex<double>> rfft(const std::vector<double>& in) {
  const std::size_t n = in.size();
  if (n < 2) throw std::invalid_argument("rfft: need at least 2 samples");
  std::vector<std::complex<double>> out(n / 2 + 1);
  std::vector<double> scratch(in);  // r2c with FFTW_ESTIMATE preserves input, copy anyway
  fftw_execute_dft_r2c(r2c_plan(n), scratch.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> irfft(const std::vector<std::complex<double>>& spectrum, std::size_t n) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("irfft: length must be even and >= 2");
  if (spectrum.size() != n / 2 + 1) {
    throw std::invalid_argument("irfft: spectrum size must be n/2+1");
  }
  std::vector<std::complex<double>> scratch(spectrum);  // c2r clobbers its input
  std::vector<double> out(n);
  fftw_execute_dft_c2r(c2r_plan(n), reinterpret_cast<fftw_complex*>(scratch.data()),
                       out.data());
  return out;
}

} // namespace optomech::fft
