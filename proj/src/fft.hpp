#ifndef OPTOMECH_FFT_HPP
#define OPTOMECH_FFT_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace optomech::fft {

// Unnormalized real-to-complex transform; output has n/2+1 bins.
std::vector<std::complex<double>> rfft(const std::vector<double>& in);

// Unnormalized complex-to-real inverse; `spectrum` must hold n/2+1 bins for
// an even output length n. The caller divides by n where needed.
std::vector<double> irfft(const std::vector<std::complex<double>>& spectrum, std::size_t n);

} // namespace optomech::fft

#endif
