#pragma once

#include "tvcs/image.hpp"

#include <Eigen/Core>

#include <complex>

namespace tvcs::fft {

using ComplexGrid = GridX<std::complex<double>>;

// 2-D DFT of an n x n grid (row transforms then column transforms). The
// inverse is normalized by 1/n^2 so that inverse(forward(x)) == x.
ComplexGrid forward2(const ComplexGrid& x);
ComplexGrid inverse2(const ComplexGrid& x);

// Orthonormal DCT-II and its inverse (DCT-III), computed with one length-N
// complex FFT (Makhoul's even/odd reordering). Valid for any N >= 1.
Eigen::VectorXd dct(const Eigen::VectorXd& x);
Eigen::VectorXd idct(const Eigen::VectorXd& coeffs);

// Separable orthonormal DCT-II on an n x n row-major grid stored flat.
Eigen::VectorXd dct2(const Eigen::VectorXd& x, Index side);
Eigen::VectorXd idct2(const Eigen::VectorXd& coeffs, Index side);

}  // namespace tvcs::fft
