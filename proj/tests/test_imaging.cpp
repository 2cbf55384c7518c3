#include "tvcs/grad_ops.hpp"
#include "tvcs/imaging.hpp"
#include "tvcs/reference_oracle.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>

#include <unistd.h>

using namespace tvcs;
namespace fs = std::filesystem;

namespace {

// Standalone evaluator: {A, a, b, x0, y0, phi} rows of the classical table.
double phantom_value(double x, double y) {
  static const double table[10][6] = {
      {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
      {-0.98, 0.6624, 0.874, 0.0, -0.0184, 0.0},
      {-0.02, 0.11, 0.31, 0.22, 0.0, -18.0},
      {-0.02, 0.16, 0.41, -0.22, 0.0, 18.0},
      {0.01, 0.21, 0.25, 0.0, 0.35, 0.0},
      {0.01, 0.046, 0.046, 0.0, 0.1, 0.0},
      {0.01, 0.046, 0.046, 0.0, -0.1, 0.0},
      {0.01, 0.046, 0.023, -0.08, -0.605, 0.0},
      {0.01, 0.023, 0.023, 0.0, -0.606, 0.0},
      {0.01, 0.023, 0.046, 0.06, -0.605, 0.0},
  };
  double v = 0.0;
  for (const auto& e : table) {
    const double phi = e[5] * std::numbers::pi / 180.0;
    const double dx = x - e[3], dy = y - e[4];
    const double xr = dx * std::cos(phi) + dy * std::sin(phi);
    const double yr = -dx * std::sin(phi) + dy * std::cos(phi);
    if ((xr * xr) / (e[1] * e[1]) + (yr * yr) / (e[2] * e[2]) <= 1.0) v += e[0];
  }
  return std::clamp(v, 0.0, 1.0);
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("tvcs_img_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

}  // namespace

TEST_CASE("shepp_logan") {
  const Index n = 64;
  const Image p = shepp_logan(n);
  SUBCASE("corner pixel is background") { CHECK(p(0, 0) == 0.0); }
  SUBCASE("values lie in [0, 1]") {
    CHECK(p.vec().minCoeff() >= 0.0);
    CHECK(p.vec().maxCoeff() <= 1.0);
    CHECK(p.vec().maxCoeff() == doctest::Approx(1.0));
  }
  SUBCASE("center row profile matches the standalone evaluator") {
    const Index r = n / 2;
    for (Index c = 0; c < n; ++c) {
      const double x = -1.0 + (2.0 * static_cast<double>(c) + 1.0) / static_cast<double>(n);
      const double y = 1.0 - (2.0 * static_cast<double>(r) + 1.0) / static_cast<double>(n);
      CHECK(p(r, c) == doctest::Approx(phantom_value(x, y)).epsilon(1e-12));
    }
  }
  SUBCASE("whole image matches the standalone evaluator at n=32") {
    const Image q = shepp_logan(32);
    double worst = 0.0;
    for (Index r = 0; r < 32; ++r) {
      for (Index c = 0; c < 32; ++c) {
        const double x = -1.0 + (2.0 * static_cast<double>(c) + 1.0) / 32.0;
        const double y = 1.0 - (2.0 * static_cast<double>(r) + 1.0) / 32.0;
        worst = std::max(worst, std::abs(q(r, c) - phantom_value(x, y)));
      }
    }
    CHECK(worst < 1e-12);
  }
  SUBCASE("deterministic") { CHECK((shepp_logan(n).vec() - p.vec()).norm() == 0.0); }
  SUBCASE("too small") { CHECK_THROWS_AS(shepp_logan(7), std::invalid_argument); }
}

TEST_CASE("relative_error") {
  const Image truth = shepp_logan(16);
  CHECK(relative_error(truth, truth) == 0.0);
  CHECK(relative_error(Image(16), truth) == doctest::Approx(100.0));
  CHECK(relative_error(Image(16, 1.1 * truth.vec()), truth) == doctest::Approx(10.0).epsilon(1e-10));
  for (double a : {0.25, 0.9, 3.0}) {
    CHECK(relative_error(Image(16, a * truth.vec()), truth) == doctest::Approx(std::abs(a - 1) * 100).epsilon(1e-10));
  }
  CHECK_THROWS_AS(relative_error(truth, Image(16)), std::invalid_argument);
  CHECK_THROWS_AS(relative_error(Image(8), truth), std::invalid_argument);
}

TEST_CASE("objective_tv_l2") {
  std::mt19937_64 rng(41);
  SUBCASE("zero image and zero data") {
    const Problem prob(make_gaussian_operator(6, 16, 1), Eigen::VectorXd::Zero(6), 4);
    const QualityReport rep = objective_tv_l2(Image(4), prob, 50.0);
    CHECK(rep.objective_tv == 0.0);
    CHECK_FALSE(rep.rel_error_percent.has_value());
  }
  SUBCASE("constant image with consistent data") {
    const SensingOperator op = make_gaussian_operator(6, 16, 1);
    const Image u = Image::Constant(4, 0.7);
    const Problem prob(op, op.apply(u.vec()), 4);
    CHECK(objective_tv_l2(u, prob, 123.0).objective_tv == doctest::Approx(0.0));
  }
  SUBCASE("random 4x4 instance matches dense evaluation") {
    const Eigen::MatrixXd a = tvcs::testing::random_vector(6 * 16, rng).reshaped(6, 16);
    const Eigen::VectorXd f = tvcs::testing::random_vector(6, rng);
    const Problem prob(SensingOperator::from_dense(a), f, 4);
    const Image u = tvcs::testing::random_image(4, rng);
    const double mu = 3.5;
    const Eigen::MatrixXd d = oracle::dense_gradient_matrix(4);
    const Eigen::VectorXd du = d * u.vec();
    double tv = 0.0;
    for (Index i = 0; i < 16; ++i) tv += std::sqrt(du[i] * du[i] + du[i + 16] * du[i + 16]);
    const double fid = 0.5 * mu * (a * u.vec() - f).squaredNorm();
    const QualityReport rep = objective_tv_l2(u, prob, mu, std::optional<Image>(u));
    CHECK(rep.tv_seminorm == doctest::Approx(tv).epsilon(1e-12));
    CHECK(rep.fidelity == doctest::Approx(fid).epsilon(1e-12));
    CHECK(rep.objective_tv == doctest::Approx(rep.tv_seminorm + rep.fidelity).epsilon(1e-12));
    REQUIRE(rep.rel_error_percent.has_value());
    CHECK(*rep.rel_error_percent == 0.0);
  }
}

TEST_CASE("objective_penalty") {
  std::mt19937_64 rng(43);
  const SensingOperator op = make_gaussian_operator(7, 16, 2);
  SUBCASE("all zero") {
    const Problem prob(op, Eigen::VectorXd::Zero(7), 4);
    CHECK(objective_penalty(Image(4), GradientField(4), prob, 10.0, 5.0) == 0.0);
  }
  SUBCASE("w = Du reduces to the TV/L2 objective") {
    const Problem prob(op, tvcs::testing::random_vector(7, rng), 4);
    const Image u = tvcs::testing::random_image(4, rng);
    CHECK(objective_penalty(u, apply_gradient(u), prob, 10.0, 5.0) ==
          doctest::Approx(objective_tv_l2(u, prob, 10.0).objective_tv).epsilon(1e-12));
  }
  SUBCASE("random inputs match dense evaluation") {
    const Problem prob(op, tvcs::testing::random_vector(7, rng), 4);
    const Image u = tvcs::testing::random_image(4, rng);
    const GradientField w = tvcs::testing::random_field(4, rng);
    const double mu = 8.0, beta = 3.0;
    const Eigen::VectorXd du = oracle::dense_gradient_matrix(4) * u.vec();
    double expected = 0.5 * mu * (op.matrix() * u.vec() - prob.f).squaredNorm();
    for (Index i = 0; i < 16; ++i) {
      const Eigen::Vector2d wi(w.vec()[i], w.vec()[i + 16]);
      const Eigen::Vector2d di(du[i], du[i + 16]);
      expected += wi.norm() + 0.5 * beta * (wi - di).squaredNorm();
    }
    CHECK(objective_penalty(u, w, prob, mu, beta) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("image file round trips") {
  TempDir dir;
  Image ramp(16);
  for (Index r = 0; r < 16; ++r) {
    for (Index c = 0; c < 16; ++c) ramp(r, c) = static_cast<double>(r * 16 + c) / 255.0 + 0.0013;
  }
  for (const char* name : {"ramp.pgm", "ramp.png"}) {
    CAPTURE(name);
    const fs::path p = dir.path / name;
    write_image(p, ramp);
    const Image once = read_image(p);
    CHECK((once.vec() - ramp.vec()).cwiseAbs().maxCoeff() <= 1.0 / 255.0);
    write_image(p, once);
    CHECK((read_image(p).vec() - once.vec()).norm() == 0.0);
  }
  SUBCASE("PGM byte layout") {
    const fs::path p = dir.path / "tiny.pgm";
    Image u(2);
    u(0, 1) = 1.0;
    u(1, 0) = 2.0;   // clipped
    u(1, 1) = -1.0;  // clipped
    write_image(p, u);
    std::ifstream in(p, std::ios::binary);
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(bytes == std::string("P5\n2 2\n255\n\x00\xff\xff\x00", 15));
  }
  SUBCASE("phantom round trip keeps RE within quantization") {
    const Image truth = shepp_logan(64);
    std::mt19937_64 rng(5);
    const Image noisy(64, (truth.vec() + tvcs::testing::random_vector(64 * 64, rng, 0.02)).cwiseMax(0.0).cwiseMin(1.0));
    write_image(dir.path / "noisy.pgm", noisy);
    const Image back = read_image(dir.path / "noisy.pgm");
    CHECK(std::abs(relative_error(back, truth) - relative_error(noisy, truth)) <= 0.5);
  }
  SUBCASE("PGM header comments and smaller maxval") {
    const fs::path p = dir.path / "c.pgm";
    write_bytes(p, std::string("P5\n# note\n2 2\n# x\n15\n\x00\x0f\x05\x0a", 25));
    const Image u = read_image(p);
    CHECK(u(0, 1) == doctest::Approx(1.0));
    CHECK(u(1, 0) == doctest::Approx(1.0 / 3.0));
  }
}

TEST_CASE("image file defects are rejected with a named defect") {
  TempDir dir;
  SUBCASE("missing file") { CHECK_THROWS_AS(read_image(dir.path / "nope.pgm"), std::runtime_error); }
  SUBCASE("non-square") {
    write_bytes(dir.path / "r.pgm", std::string("P5\n3 2\n255\n\x01\x02\x03\x04\x05\x06", 17));
    CHECK_THROWS_WITH(read_image(dir.path / "r.pgm"), doctest::Contains("square"));
  }
  SUBCASE("truncated") {
    write_bytes(dir.path / "t.pgm", std::string("P5\n4 4\n255\n\x01\x02", 13));
    CHECK_THROWS_WITH(read_image(dir.path / "t.pgm"), doctest::Contains("truncated"));
  }
  SUBCASE("unsupported format") {
    write_bytes(dir.path / "a.pgm", "P2\n2 2\n255\n0 0 0 0\n");
    CHECK_THROWS_AS(read_image(dir.path / "a.pgm"), std::runtime_error);
    write_bytes(dir.path / "b.txt", "hello");
    CHECK_THROWS_AS(read_image(dir.path / "b.txt"), std::runtime_error);
  }
  SUBCASE("16-bit maxval") {
    write_bytes(dir.path / "w.pgm", std::string("P5\n1 1\n65535\n\x00\x01", 15));
    CHECK_THROWS_AS(read_image(dir.path / "w.pgm"), std::runtime_error);
  }
}
