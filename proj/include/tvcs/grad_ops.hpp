#pragma once

#include "tvcs/image.hpp"

#include <Eigen/Core>

#include <cmath>

namespace tvcs {

// Forward differences with periodic wrap:
//   horizontal(r, c) = u(r, c+1) - u(r, c)
//   vertical(r, c)   = u(r+1, c) - u(r, c)
template <typename Scalar>
BasicGradientField<Scalar> apply_gradient(const BasicImage<Scalar>& u) {
  const Index n = u.side();
  BasicGradientField<Scalar> field(n);
  const auto g = u.grid();
  Eigen::Map<GridX<Scalar>> dx(field.vec().data(), n, n);
  Eigen::Map<GridX<Scalar>> dy(field.vec().data() + n * n, n, n);
  for (Index r = 0; r < n; ++r) {
    const Index rn = (r + 1 == n) ? 0 : r + 1;
    for (Index c = 0; c < n; ++c) {
      const Index cn = (c + 1 == n) ? 0 : c + 1;
      dx(r, c) = g(r, cn) - g(r, c);
      dy(r, c) = g(rn, c) - g(r, c);
    }
  }
  return field;
}

/// Exact adjoint of apply_gradient (a negative periodic divergence).
template <typename Scalar>
BasicImage<Scalar> apply_gradient_adjoint(const BasicGradientField<Scalar>& w) {
  const Index n = w.side();
  BasicImage<Scalar> out(n);
  auto g = out.grid();
  Eigen::Map<const GridX<Scalar>> wx(w.vec().data(), n, n);
  Eigen::Map<const GridX<Scalar>> wy(w.vec().data() + n * n, n, n);
  for (Index r = 0; r < n; ++r) {
    const Index rp = (r == 0) ? n - 1 : r - 1;
    for (Index c = 0; c < n; ++c) {
      const Index cp = (c == 0) ? n - 1 : c - 1;
      g(r, c) = wx(r, cp) - wx(r, c) + wy(rp, c) - wy(r, c);
    }
  }
  return out;
}

/// Two-dimensional shrinkage max(|a| - t, 0) a / |a|, i.e. a minus its
/// projection onto the closed disc of radius t. Returns zero for |a| <= t.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 2, 1> shrink2(const Eigen::MatrixBase<Derived>& a,
                                                      typename Derived::Scalar threshold) {
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(Derived, 2);
  using Scalar = typename Derived::Scalar;
  const Scalar norm = std::hypot(a[0], a[1]);
  if (norm <= threshold) return Eigen::Matrix<Scalar, 2, 1>::Zero();
  return ((norm - threshold) / norm) * a;
}

template <typename Scalar>
BasicGradientField<Scalar> shrink_field(const BasicGradientField<Scalar>& g, Scalar threshold) {
  BasicGradientField<Scalar> out(g.side());
  const Index np = g.pixels();
  for (Index i = 0; i < np; ++i) out.set_pair(i, shrink2(g.pair(i), threshold));
  return out;
}

template <typename Scalar>
Scalar tv_seminorm(const BasicGradientField<Scalar>& g) {
  return (g.horizontal().array().square() + g.vertical().array().square()).sqrt().sum();
}

/// Diagonalized solver for (D^T D + shift I) u = rhs under periodic boundary
/// conditions. Eigenvalues are stored on the n x n frequency grid, row-major.
class SpectralSolver {
 public:
  SpectralSolver(Index side, double shift);

  Index side() const { return side_; }
  double shift() const { return shift_; }
  const Eigen::VectorXd& eig_dtd() const { return eig_dtd_; }
  const Eigen::VectorXd& eig_h() const { return eig_h_; }

  Image solve(const Image& rhs) const;

 private:
  Index side_;
  double shift_;
  Eigen::VectorXd eig_dtd_;
  Eigen::VectorXd eig_h_;
};

inline SpectralSolver build_spectral_solver(Index side, double shift) {
  return SpectralSolver(side, shift);
}

}  // namespace tvcs
