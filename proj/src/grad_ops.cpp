#include "tvcs/grad_ops.hpp"

#include "tvcs/fft.hpp"

#include <sstream>
#include <stdexcept>

namespace tvcs {

SpectralSolver::SpectralSolver(Index side, double shift) : side_(side), shift_(shift) {
  if (side < 2) throw std::invalid_argument("spectral solver needs side >= 2 (difference stencil undefined on one pixel)");
  if (!(shift > 0.0)) throw std::invalid_argument("spectral solver shift must be positive");

  // Difference kernels as circular convolutions: (k * u)(r, c) = u(r, c+1) - u(r, c)
  // puts +1 at column n-1 and -1 at the origin; likewise for rows.
  fft::ComplexGrid kx = fft::ComplexGrid::Zero(side, side);
  fft::ComplexGrid ky = fft::ComplexGrid::Zero(side, side);
  kx(0, 0) = -1.0;
  kx(0, side - 1) = 1.0;
  ky(0, 0) = -1.0;
  ky(side - 1, 0) = 1.0;
  const fft::ComplexGrid fx = fft::forward2(kx);
  const fft::ComplexGrid fy = fft::forward2(ky);

  eig_dtd_.resize(side * side);
  for (Index r = 0; r < side; ++r) {
    for (Index c = 0; c < side; ++c) {
      eig_dtd_[r * side + c] = std::norm(fx(r, c)) + std::norm(fy(r, c));
    }
  }
  eig_h_ = eig_dtd_.array() + shift_;
}

Image SpectralSolver::solve(const Image& rhs) const {
  if (rhs.side() != side_) {
    std::ostringstream msg;
    msg << "spectral solver built for side " << side_ << " but rhs has side " << rhs.side();
    throw std::invalid_argument(msg.str());
  }
  fft::ComplexGrid spectrum = fft::forward2(rhs.grid().cast<std::complex<double>>());
  for (Index r = 0; r < side_; ++r) {
    for (Index c = 0; c < side_; ++c) spectrum(r, c) /= eig_h_[r * side_ + c];
  }
  const fft::ComplexGrid x = fft::inverse2(spectrum);

  Image out(side_);
  out.grid() = x.real();
  const double real_norm = out.vec().norm();
  const double imag_norm = x.imag().norm();
  if (imag_norm > 1e-10 * real_norm) {
    std::ostringstream msg;
    msg << "spectral solve produced imaginary residue " << imag_norm << " against real norm "
        << real_norm;
    throw std::logic_error(msg.str());
  }
  return out;
}

}  // namespace tvcs
