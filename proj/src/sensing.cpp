#include "tvcs/sensing.hpp"

#include "tvcs/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tvcs {

std::string to_string(SensingKind kind) {
  switch (kind) {
    case SensingKind::Dense:
      return "dense";
    case SensingKind::PartialDct:
      return "partial-dct";
  }
  return "unknown";
}

SensingOperator SensingOperator::from_dense(Eigen::MatrixXd matrix, std::uint64_t seed) {
  if (matrix.rows() < 1 || matrix.cols() < 1) throw std::invalid_argument("sensing matrix must be non-empty");
  if (!matrix.allFinite()) throw std::invalid_argument("sensing matrix contains non-finite entries");
  SensingOperator op;
  op.kind_ = SensingKind::Dense;
  op.rows_ = matrix.rows();
  op.cols_ = matrix.cols();
  op.seed_ = seed;
  op.dense_ = std::make_shared<const Eigen::MatrixXd>(std::move(matrix));
  return op;
}

SensingOperator SensingOperator::partial_dct(Index signal_length, std::vector<Index> rows,
                                             DctLayout layout, std::uint64_t seed) {
  if (signal_length < 1) throw std::invalid_argument("signal length must be positive");
  if (rows.empty()) throw std::invalid_argument("partial DCT needs at least one row");
  std::sort(rows.begin(), rows.end());
  if (std::adjacent_find(rows.begin(), rows.end()) != rows.end()) {
    throw std::invalid_argument("partial DCT row indices must be distinct");
  }
  if (rows.front() < 0 || rows.back() >= signal_length) {
    throw std::invalid_argument("partial DCT row index out of range");
  }
  SensingOperator op;
  op.kind_ = SensingKind::PartialDct;
  op.layout_ = layout;
  op.rows_ = static_cast<Index>(rows.size());
  op.cols_ = signal_length;
  op.seed_ = seed;
  if (layout == DctLayout::Separable2d) {
    const auto side = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(signal_length))));
    if (side * side != signal_length) {
      throw std::invalid_argument("2-D DCT layout needs a square signal length");
    }
    op.side_ = side;
  }
  op.selected_ = std::make_shared<const std::vector<Index>>(std::move(rows));
  return op;
}

const Eigen::MatrixXd& SensingOperator::matrix() const {
  if (!dense_) throw std::logic_error("operator has no dense payload");
  return *dense_;
}

const std::vector<Index>& SensingOperator::selected_rows() const {
  if (!selected_) throw std::logic_error("operator has no row selection");
  return *selected_;
}

Eigen::VectorXd SensingOperator::transform(const Eigen::VectorXd& u) const {
  return layout_ == DctLayout::Flat ? fft::dct(u) : fft::dct2(u, side_);
}

Eigen::VectorXd SensingOperator::inverse_transform(const Eigen::VectorXd& c) const {
  return layout_ == DctLayout::Flat ? fft::idct(c) : fft::idct2(c, side_);
}

Eigen::VectorXd SensingOperator::apply(const Eigen::VectorXd& u) const {
  if (u.size() != cols_) {
    std::ostringstream msg;
    msg << "sensing apply: signal has length " << u.size() << ", operator expects " << cols_;
    throw std::invalid_argument(msg.str());
  }
  if (kind_ == SensingKind::Dense) return (*dense_) * u;
  const Eigen::VectorXd coeffs = transform(u);
  Eigen::VectorXd y(rows_);
  const auto& sel = *selected_;
  for (Index i = 0; i < rows_; ++i) y[i] = coeffs[sel[i]];
  return y;
}

Eigen::VectorXd SensingOperator::apply_adjoint(const Eigen::VectorXd& y) const {
  if (y.size() != rows_) {
    std::ostringstream msg;
    msg << "sensing adjoint: measurement vector has length " << y.size() << ", operator expects "
        << rows_;
    throw std::invalid_argument(msg.str());
  }
  if (kind_ == SensingKind::Dense) return dense_->transpose() * y;
  Eigen::VectorXd padded = Eigen::VectorXd::Zero(cols_);
  const auto& sel = *selected_;
  for (Index i = 0; i < rows_; ++i) padded[sel[i]] = y[i];
  return inverse_transform(padded);
}

Eigen::MatrixXd SensingOperator::to_dense() const {
  if (kind_ == SensingKind::Dense) return *dense_;
  Eigen::MatrixXd out(rows_, cols_);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(cols_);
  for (Index j = 0; j < cols_; ++j) {
    e[j] = 1.0;
    out.col(j) = apply(e);
    e[j] = 0.0;
  }
  return out;
}

namespace {

void check_sizes(Index m, Index n2) {
  if (m < 1 || n2 < 1) throw std::invalid_argument("sensing sizes must be positive");
  if (m > n2) {
    std::ostringstream msg;
    msg << "measurement count " << m << " exceeds signal length " << n2;
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

SensingOperator make_gaussian_operator(Index m, Index n2, std::uint64_t seed, Index max_entries) {
  check_sizes(m, n2);
  if (n2 > max_entries / m) {
    std::ostringstream msg;
    msg << "dense Gaussian operator of " << m << " x " << n2 << " needs "
        << (static_cast<double>(m) * static_cast<double>(n2) * 8.0 / (1 << 20))
        << " MiB; cap is " << max_entries << " entries (use partial-dct for large images)";
    throw std::invalid_argument(msg.str());
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(n2)));
  Eigen::MatrixXd a(m, n2);
  for (Index j = 0; j < n2; ++j) {
    for (Index i = 0; i < m; ++i) a(i, j) = normal(rng);
  }
  return SensingOperator::from_dense(std::move(a), seed);
}

SensingOperator make_partial_dct_operator(Index m, Index n2, std::uint64_t seed, DctLayout layout) {
  check_sizes(m, n2);
  std::vector<Index> pool(static_cast<std::size_t>(n2 - 1));
  std::iota(pool.begin(), pool.end(), Index{1});
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first m - 1 slots become a uniform sample.
  for (Index i = 0; i < m - 1; ++i) {
    std::uniform_int_distribution<Index> pick(i, n2 - 2);
    std::swap(pool[i], pool[pick(rng)]);
  }
  std::vector<Index> rows{0};
  rows.insert(rows.end(), pool.begin(), pool.begin() + (m - 1));
  return SensingOperator::partial_dct(n2, std::move(rows), layout, seed);
}

SpectralRadiusEstimate estimate_spectral_radius(const SensingOperator& op, double tol, int max_iters,
                                                std::uint64_t seed) {
  if (!(tol > 0.0)) throw std::invalid_argument("spectral radius tolerance must be positive");
  SpectralRadiusEstimate est;
  if (op.kind() == SensingKind::PartialDct) {
    est.value = 1.0;
    est.converged = true;
    return est;
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd x(op.cols());
  for (Index i = 0; i < x.size(); ++i) x[i] = normal(rng);
  x.normalize();

  double previous = 0.0;
  for (int it = 1; it <= max_iters; ++it) {
    const Eigen::VectorXd y = op.apply_adjoint(op.apply(x));
    const double rayleigh = x.dot(y);
    est.value = rayleigh;
    est.iterations = it;
    const double ynorm = y.norm();
    if (ynorm == 0.0) {
      est.converged = true;
      return est;
    }
    if (it > 1 && std::abs(rayleigh - previous) <= tol * std::abs(rayleigh)) {
      est.converged = true;
      return est;
    }
    previous = rayleigh;
    x = y / ynorm;
  }
  return est;
}

Observation synthesize_observation(const SensingOperator& op, const Image& u_true, double sigma,
                                   std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("noise sigma must be nonnegative");
  Observation obs;
  obs.sigma = sigma;
  obs.values = op.apply(u_true.vec());
  if (sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    for (Index i = 0; i < obs.values.size(); ++i) obs.values[i] += sigma * normal(rng);
  }
  return obs;
}

Problem::Problem(SensingOperator op_in, Eigen::VectorXd f_in, Index side_in)
    : op(std::move(op_in)), f(std::move(f_in)), side(side_in) {
  if (side < 2) throw std::invalid_argument("problem side must be at least 2");
  if (op.cols() != side * side) {
    std::ostringstream msg;
    msg << "operator acts on " << op.cols() << " values but the image has " << side * side;
    throw std::invalid_argument(msg.str());
  }
  if (f.size() != op.rows()) {
    std::ostringstream msg;
    msg << "observation has " << f.size() << " values, operator produces " << op.rows();
    throw std::invalid_argument(msg.str());
  }
  if (!f.allFinite()) throw std::invalid_argument("observation contains non-finite values");
}

}  // namespace tvcs
