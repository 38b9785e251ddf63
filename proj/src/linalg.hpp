#ifndef OPTOMECH_SRC_LINALG_HPP
#define OPTOMECH_SRC_LINALG_HPP

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace optomech {

// Solves A*x = b in place by Gaussian elimination with partial pivoting.
// A is row-major n*n. Small dense systems only.
template <typename Scalar>
std::vector<Scalar> solve_dense(std::vector<Scalar> a, std::vector<Scalar> b) {
  const std::size_t n = b.size();
  if (a.size() != n * n) throw std::invalid_argument("solve_dense: shape mismatch");
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::abs(a[col * n + col]);
    for (std::size_t row = col + 1; row < n; ++row) {
      const double mag = std::abs(a[row * n + col]);
      if (mag > best) {
        best = mag;
        pivot = row;
      }
    }
    if (best == 0.0) throw std::runtime_error("solve_dense: singular matrix");
    if (pivot != col) {
      for (std::size_t k = col; k < n; ++k) std::swap(a[col * n + k], a[pivot * n + k]);
      std::swap(b[col], b[pivot]);
    }
    const Scalar inv = Scalar(1.0) / a[col * n + col];
    for (std::size_t row = col + 1; row < n; ++row) {
      const Scalar factor = a[row * n + col] * inv;
      if (factor == Scalar(0.0)) continue;
      a[row * n + col] = Scalar(0.0);
      for (std::size_t k = col + 1; k < n; ++k) a[row * n + k] -= factor * a[col * n + k];
      b[row] -= factor * b[col];
    }
  }
  std::vector<Scalar> x(n);
  for (std::size_t i = n; i-- > 0;) {
    Scalar acc = b[i];
    for (std::size_t k = i + 1; k < n; ++k) acc -= a[i * n + k] * x[k];
    x[i] = acc / a[i * n + i];
  }
  return x;
}

} // namespace optomech

#endif
