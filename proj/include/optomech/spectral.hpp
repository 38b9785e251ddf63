#ifndef OPTOMECH_SPECTRAL_HPP
#define OPTOMECH_SPECTRAL_HPP

#include <string>
#include <vector>

namespace optomech {

// One-sided spectral estimate on a uniform frequency grid.
// psd[k] = asd[k]^2 at every bin; enbw converts peak PSD to tone RMS.
struct SpectralEstimate {
  std::vector<double> grid_hz;
  std::vector<double> asd;
  std::vector<double> psd;
  std::size_t n_segments = 0;
  std::string window;
  double enbw_hz = 0.0;
  double segment_duration_s = 0.0;
  std::string unit = "1";   // unit of the quantity whose ASD this is, e.g. "V"
};

} // namespace optomech

#endif
