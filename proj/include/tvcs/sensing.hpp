#pragma once

#include "tvcs/image.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace tvcs {

enum class SensingKind { Dense, PartialDct };

/// How partial-DCT rows index the signal: a 1-D orthonormal DCT of the
/// vectorized image (default), or the separable 2-D DCT of the n x n grid.
enum class DctLayout { Flat, Separable2d };

std::string to_string(SensingKind kind);

/// Linear map A: R^{n2} -> R^m together with its adjoint. Copies share the
/// immutable payload, so passing operators by value is cheap.
class SensingOperator {
 public:
  static SensingOperator from_dense(Eigen::MatrixXd matrix, std::uint64_t seed = 0);
  static SensingOperator partial_dct(Index signal_length, std::vector<Index> rows,
                                     DctLayout layout = DctLayout::Flat, std::uint64_t seed = 0);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  SensingKind kind() const { return kind_; }
  DctLayout layout() const { return layout_; }
  std::uint64_t seed() const { return seed_; }

  const Eigen::MatrixXd& matrix() const;
  const std::vector<Index>& selected_rows() const;

  Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
  Eigen::VectorXd apply_adjoint(const Eigen::VectorXd& y) const;

  /// Materializes A column by column. Intended for small problems only.
  Eigen::MatrixXd to_dense() const;

 private:
  SensingOperator() = default;

  Eigen::VectorXd transform(const Eigen::VectorXd& u) const;
  Eigen::VectorXd inverse_transform(const Eigen::VectorXd& c) const;

  SensingKind kind_ = SensingKind::Dense;
  DctLayout layout_ = DctLayout::Flat;
  Index rows_ = 0;
  Index cols_ = 0;
  Index side_ = 0;
  std::uint64_t seed_ = 0;
  std::shared_ptr<const Eigen::MatrixXd> dense_;
  std::shared_ptr<const std::vector<Index>> selected_;
};

inline Eigen::VectorXd apply(const SensingOperator& op, const Eigen::VectorXd& u) {
  return op.apply(u);
}
inline Eigen::VectorXd apply_adjoint(const SensingOperator& op, const Eigen::VectorXd& y) {
  return op.apply_adjoint(y);
}

/// Entry-count ceiling for dense Gaussian operators (2^27 doubles = 1 GiB).
inline constexpr Index kDefaultMaxDenseEntries = Index{1} << 27;

/// Dense matrix with i.i.d. N(0, 1/n2) entries, deterministic in `seed`.
SensingOperator make_gaussian_operator(Index m, Index n2, std::uint64_t seed,
                                       Index max_entries = kDefaultMaxDenseEntries);

/// m rows of the orthonormal n2-point DCT. The DC row is always selected
/// (a constant image must not be invisible to A); the other m - 1 rows are
/// drawn uniformly without replacement. Indices are stored sorted.
SensingOperator make_partial_dct_operator(Index m, Index n2, std::uint64_t seed,
                                          DctLayout layout = DctLayout::Flat);

struct SpectralRadiusEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;

  // Unconverged estimates come from below; callers inflate them before
  // deriving a step size.
  static constexpr double kUnconvergedSafetyFactor = 1.05;
  double safe_bound() const { return converged ? value : kUnconvergedSafetyFactor * value; }
};

/// Power iteration on A^T A. Partial-DCT operators return exactly 1.
SpectralRadiusEstimate estimate_spectral_radius(const SensingOperator& op, double tol = 1e-10,
                                                int max_iters = 2000, std::uint64_t seed = 0x5eed);

struct Observation {
  Eigen::VectorXd values;
  double sigma = 0.0;
};

/// f = A vec(u_true) + sigma z, z i.i.d. standard normal.
Observation synthesize_observation(const SensingOperator& op, const Image& u_true, double sigma,
                                   std::uint64_t seed);

/// Sensing operator plus measurements for an n x n unknown.
struct Problem {
  Problem(SensingOperator op, Eigen::VectorXd f, Index side);

  SensingOperator op;
  Eigen::VectorXd f;
  Index side;
};

}  // namespace tvcs
