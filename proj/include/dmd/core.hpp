#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace dmd {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Descriptor geometry, all in pixels at 500 ppi.
inline constexpr int grid_size = 8;    // cells per patch side
inline constexpr int grid_cells = grid_size * grid_size;
inline constexpr int cell_size = 16;   // px per cell side
inline constexpr int patch_size = grid_size * cell_size;  // 128 px
inline constexpr int default_channels = 12;

static_assert(patch_size == grid_size * cell_size);

/// Wraps an angle into [0, 2*pi).
inline double wrap_angle(double t) {
  t = std::fmod(t, two_pi);
  if (t < 0.0) t += two_pi;
  if (t >= two_pi) t = 0.0;  // fmod can land exactly on 2*pi after the add
  return t;
}

/// Signed wrapped difference a - b in (-pi, pi]. A difference of exactly pi
/// maps to +pi, never -pi.
inline double angle_diff(double a, double b) {
  double d = std::remainder(a - b, two_pi);
  if (d <= -std::numbers::pi) d += two_pi;
  return d;
}

/// Nearest binary32 value of v, as a float. The volatile temporary forces the
/// narrowing to actually happen: GCC 11 at -O3 can otherwise drop an inlined
/// double -> float -> double chain and leave the full double behind.
inline float f32_round(double v) {
  volatile float f = static_cast<float>(v);
  return f;
}

/// Minutia in the raster image frame: x grows rightward, y grows downward,
/// and theta in [0, 2*pi) is measured from +x toward +y, so the unit
/// direction of a minutia is (cos theta, sin theta).
struct Minutia {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Minutia() = default;
  Minutia(double x_, double y_, double theta_)
      : x(x_), y(y_), theta(wrap_angle(theta_)) {
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(theta))
      throw std::invalid_argument("minutia fields must be finite");
  }
};

inline double distance(const Minutia& a, const Minutia& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Rigid motion: position rotated by beta about the image origin, then
/// translated; direction advanced by beta (and re-wrapped).
inline Minutia rigid_transform(const Minutia& m, double beta, double tx,
                               double ty) {
  const double c = std::cos(beta), s = std::sin(beta);
  return Minutia(c * m.x - s * m.y + tx, s * m.x + c * m.y + ty,
                 m.theta + beta);
}

/// The minutia-centered, orientation-aligned square patch a descriptor is
/// sampled from. Patch coordinates (u, v) run over [0, patch_size) with the
/// minutia at the patch center; the patch +u axis points along the minutia
/// direction and +v is +u rotated a quarter turn toward image +y.
struct PatchFrame {
  Minutia origin;

  explicit PatchFrame(const Minutia& m) : origin(m) {}

  /// Patch coordinates -> image coordinates.
  std::pair<double, double> patch_to_image(double u, double v) const {
    const double c = std::cos(origin.theta), s = std::sin(origin.theta);
    const double du = u - patch_size / 2.0;
    const double dv = v - patch_size / 2.0;
    return {origin.x + c * du - s * dv, origin.y + s * du + c * dv};
  }

  /// Image coordinates -> patch coordinates (inverse of patch_to_image).
  std::pair<double, double> image_to_patch(double x, double y) const {
    const double c = std::cos(origin.theta), s = std::sin(origin.theta);
    const double dx = x - origin.x;
    const double dy = y - origin.y;
    return {patch_size / 2.0 + c * dx + s * dy,
            patch_size / 2.0 - s * dx + c * dy};
  }

  /// Image-space center of descriptor cell (row, col). Cell (row, col)
  /// covers patch pixels [col*cell, (col+1)*cell) x [row*cell, (row+1)*cell),
  /// i.e. rows advance along +v and columns along +u.
  std::pair<double, double> cell_center(int row, int col) const {
    if (row < 0 || row >= grid_size || col < 0 || col >= grid_size)
      throw std::out_of_range("descriptor cell index out of range");
    const double u = col * cell_size + cell_size / 2.0;
    const double v = row * cell_size + cell_size / 2.0;
    return patch_to_image(u, v);
  }
};

}  // namespace dmd
