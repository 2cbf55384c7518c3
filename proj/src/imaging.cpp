#include "tvcs/imaging.hpp"

#include "tvcs/grad_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tvcs {

const std::array<Ellipse, 10> kSheppLoganEllipses = {{
    {1.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0},
    {-0.98, 0.6624, 0.8740, 0.00, -0.0184, 0.0},
    {-0.02, 0.1100, 0.3100, 0.22, 0.0000, -18.0},
    {-0.02, 0.1600, 0.4100, -0.22, 0.0000, 18.0},
    {0.01, 0.2100, 0.2500, 0.00, 0.3500, 0.0},
    {0.01, 0.0460, 0.0460, 0.00, 0.1000, 0.0},
    {0.01, 0.0460, 0.0460, 0.00, -0.1000, 0.0},
    {0.01, 0.0460, 0.0230, -0.08, -0.6050, 0.0},
    {0.01, 0.0230, 0.0230, 0.00, -0.6060, 0.0},
    {0.01, 0.0230, 0.0460, 0.06, -0.6050, 0.0},
}};

Image shepp_logan(Index side) {
  if (side < 8) throw std::invalid_argument("Shepp-Logan phantom needs side >= 8");
  Image img(side);
  const double n = static_cast<double>(side);
  for (Index r = 0; r < side; ++r) {
    const double y = 1.0 - (2.0 * static_cast<double>(r) + 1.0) / n;
    for (Index c = 0; c < side; ++c) {
      const double x = -1.0 + (2.0 * static_cast<double>(c) + 1.0) / n;
      double value = 0.0;
      for (const Ellipse& e : kSheppLoganEllipses) {
        const double t = e.angle_deg * std::numbers::pi / 180.0;
        const double dx = x - e.center_x;
        const double dy = y - e.center_y;
        const double xr = (dx * std::cos(t) + dy * std::sin(t)) / e.semi_x;
        const double yr = (-dx * std::sin(t) + dy * std::cos(t)) / e.semi_y;
        if (xr * xr + yr * yr <= 1.0) value += e.intensity;
      }
      img(r, c) = std::clamp(value, 0.0, 1.0);
    }
  }
  return img;
}

double relative_error(const Image& u, const Image& u_true) {
  if (u.side() != u_true.side()) throw std::invalid_argument("relative_error: image sizes differ");
  const double denom = u_true.vec().norm();
  if (denom == 0.0) throw std::invalid_argument("relative_error: reference image has zero norm");
  return 100.0 * (u.vec() - u_true.vec()).norm() / denom;
}

namespace {

void check_image_for(const Image& u, const Problem& problem) {
  if (u.side() != problem.side) throw std::invalid_argument("image size does not match the problem");
}

}  // namespace

QualityReport objective_tv_l2(const Image& u, const Problem& problem, double mu,
                              const std::optional<Image>& truth) {
  check_image_for(u, problem);
  QualityReport report;
  report.tv_seminorm = tv_seminorm(apply_gradient(u));
  report.fidelity = 0.5 * mu * (problem.op.apply(u.vec()) - problem.f).squaredNorm();
  report.objective_tv = report.tv_seminorm + report.fidelity;
  if (truth) report.rel_error_percent = relative_error(u, *truth);
  return report;
}

double objective_penalty(const Image& u, const GradientField& w, const Problem& problem, double mu,
                         double beta) {
  check_image_for(u, problem);
  if (w.side() != u.side()) throw std::invalid_argument("gradient field size does not match the image");
  const GradientField du = apply_gradient(u);
  const double split = 0.5 * beta * (w.vec() - du.vec()).squaredNorm();
  const double fidelity = 0.5 * mu * (problem.op.apply(u.vec()) - problem.f).squaredNorm();
  return tv_seminorm(w) + split + fidelity;
}

}  // namespace tvcs
