#include "tvcs/fft.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace tvcs::fft {
namespace {

using Complex = std::complex<double>;

ComplexGrid transform2(const ComplexGrid& x, bool inverse) {
  if (x.rows() != x.cols()) throw std::invalid_argument("2-D FFT expects a square grid");
  const Index n = x.rows();
  Eigen::FFT<double> engine;
  ComplexGrid out = x;
  std::vector<Complex> in(static_cast<std::size_t>(n)), res(static_cast<std::size_t>(n));
  auto run = [&] {
    if (inverse) {
      engine.inv(res, in);
    } else {
      engine.fwd(res, in);
    }
  };
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < n; ++c) in[c] = out(r, c);
    run();
    for (Index c = 0; c < n; ++c) out(r, c) = res[c];
  }
  for (Index c = 0; c < n; ++c) {
    for (Index r = 0; r < n; ++r) in[r] = out(r, c);
    run();
    for (Index r = 0; r < n; ++r) out(r, c) = res[r];
  }
  return out;
}

}  // namespace

ComplexGrid forward2(const ComplexGrid& x) { return transform2(x, false); }
ComplexGrid inverse2(const ComplexGrid& x) { return transform2(x, true); }

Eigen::VectorXd dct(const Eigen::VectorXd& x) {
  const Index n = x.size();
  if (n <= 1) return x;  // kissfft cannot plan a length-1 transform
  std::vector<Complex> v(static_cast<std::size_t>(n)), spectrum;
  // Even samples ascending, odd samples descending.
  for (Index k = 0; 2 * k < n; ++k) v[k] = x[2 * k];
  for (Index k = 0; 2 * k + 1 < n; ++k) v[n - 1 - k] = x[2 * k + 1];
  Eigen::FFT<double> engine;
  engine.fwd(spectrum, v);

  Eigen::VectorXd out(n);
  const double scale0 = std::sqrt(1.0 / static_cast<double>(n));
  const double scale = std::sqrt(2.0 / static_cast<double>(n));
  for (Index k = 0; k < n; ++k) {
    const double angle = -std::numbers::pi * static_cast<double>(k) / (2.0 * static_cast<double>(n));
    const Complex twiddle(std::cos(angle), std::sin(angle));
    out[k] = (twiddle * spectrum[k]).real() * (k == 0 ? scale0 : scale);
  }
  return out;
}

Eigen::VectorXd idct(const Eigen::VectorXd& coeffs) {
  const Index n = coeffs.size();
  if (n <= 1) return coeffs;
  // Undo the orthonormal scaling to recover the plain DCT-II sums c[k].
  Eigen::VectorXd c = coeffs * std::sqrt(static_cast<double>(n) / 2.0);
  c[0] = coeffs[0] * std::sqrt(static_cast<double>(n));

  std::vector<Complex> spectrum(static_cast<std::size_t>(n)), v;
  for (Index k = 0; k < n; ++k) {
    const double angle = std::numbers::pi * static_cast<double>(k) / (2.0 * static_cast<double>(n));
    const Complex twiddle(std::cos(angle), std::sin(angle));
    const double mirrored = (k == 0) ? 0.0 : c[n - k];
    spectrum[k] = twiddle * Complex(c[k], -mirrored);
  }
  Eigen::FFT<double> engine;
  engine.inv(v, spectrum);

  Eigen::VectorXd x(n);
  for (Index k = 0; 2 * k < n; ++k) x[2 * k] = v[k].real();
  for (Index k = 0; 2 * k + 1 < n; ++k) x[2 * k + 1] = v[n - 1 - k].real();
  return x;
}

namespace {

template <typename Transform>
Eigen::VectorXd separable(const Eigen::VectorXd& x, Index side, Transform transform) {
  if (x.size() != side * side) throw std::invalid_argument("2-D DCT size mismatch");
  GridX<double> grid = Eigen::Map<const GridX<double>>(x.data(), side, side);
  for (Index r = 0; r < side; ++r) {
    grid.row(r) = transform(Eigen::VectorXd(grid.row(r).transpose())).transpose();
  }
  for (Index c = 0; c < side; ++c) {
    grid.col(c) = transform(Eigen::VectorXd(grid.col(c)));
  }
  return Eigen::Map<const Eigen::VectorXd>(grid.data(), side * side);
}

}  // namespace

Eigen::VectorXd dct2(const Eigen::VectorXd& x, Index side) {
  return separable(x, side, [](const Eigen::VectorXd& v) { return dct(v); });
}

Eigen::VectorXd idct2(const Eigen::VectorXd& coeffs, Index side) {
  return separable(coeffs, side, [](const Eigen::VectorXd& v) { return idct(v); });
}

}  // namespace tvcs::fft
