#pragma once

#include "tvcs/image.hpp"
#include "tvcs/sensing.hpp"

#include <array>
#include <filesystem>
#include <optional>

namespace tvcs {

struct Ellipse {
  double intensity;
  double semi_x;
  double semi_y;
  double center_x;
  double center_y;
  double angle_deg;
};

/// Classical Shepp-Logan ellipse table (intensities 1, -0.98, -0.02, ...).
extern const std::array<Ellipse, 10> kSheppLoganEllipses;

/// Phantom sampled at pixel centers on [-1, 1]^2 (row 0 at y = +1), ellipse
/// intensities summed and the result clipped to [0, 1].
Image shepp_logan(Index side);

/// 100 * |u - u_true| / |u_true|.
double relative_error(const Image& u, const Image& u_true);

struct QualityReport {
  std::optional<double> rel_error_percent;
  double objective_tv = 0.0;  // tv_seminorm + fidelity
  double tv_seminorm = 0.0;
  double fidelity = 0.0;      // (mu / 2) |Au - f|^2
};

QualityReport objective_tv_l2(const Image& u, const Problem& problem, double mu,
                              const std::optional<Image>& truth = std::nullopt);

/// sum_i (|w_i| + beta/2 |w_i - D_i u|^2) + mu/2 |Au - f|^2
double objective_penalty(const Image& u, const GradientField& w, const Problem& problem, double mu,
                         double beta);

/// Reads binary PGM (P5, maxval <= 255) or 8-bit grayscale PNG, mapping
/// intensities linearly onto [0, 1]. Only square images are accepted.
Image read_image(const std::filesystem::path& path);

/// Writes values clipped to [0, 1] and quantized to 8 bits. The format
/// follows the extension: ".png" writes PNG, anything else binary PGM.
void write_image(const std::filesystem::path& path, const Image& u);

}  // namespace tvcs
