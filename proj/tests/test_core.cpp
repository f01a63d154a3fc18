#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "support.hpp"

using namespace dmd;
using Catch::Approx;

TEST_CASE("wrap_angle maps any angle into [0, 2pi)") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(two_pi) == 0.0);
  CHECK(wrap_angle(-0.1) == Approx(two_pi - 0.1).margin(1e-12));
  CHECK(wrap_angle(7.0 * std::numbers::pi) == Approx(std::numbers::pi).margin(1e-12));
  Rng rng(41);
  for (int i = 0; i < 1000; ++i) {
    const double w = wrap_angle(rng.next_uniform(-100.0, 100.0));
    CHECK(w >= 0.0);
    CHECK(w < two_pi);
  }
}

TEST_CASE("angle_diff is the signed wrapped difference in (-pi, pi]") {
  CHECK(angle_diff(0.0, 0.0) == 0.0);
  CHECK(angle_diff(0.1, two_pi - 0.1) == Approx(0.2).margin(1e-12));
  CHECK(angle_diff(std::numbers::pi, 0.0) == Approx(std::numbers::pi).margin(1e-15));
  // A half-turn difference lands on +pi from either direction.
  CHECK(angle_diff(0.0, std::numbers::pi) == Approx(std::numbers::pi).margin(1e-15));
  CHECK(angle_diff(0.0, std::numbers::pi) > 0.0);

  Rng rng(42);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.next_uniform(0.0, two_pi);
    const double b = rng.next_uniform(0.0, two_pi);
    const double d = angle_diff(a, b);
    CHECK(d > -std::numbers::pi);
    CHECK(d <= std::numbers::pi);
    // Adding the difference back recovers the first angle (mod 2pi).
    CHECK(wrap_angle(b + d) == Approx(wrap_angle(a)).margin(1e-9));
    if (std::fabs(d) < std::numbers::pi - 1e-9)
      CHECK(angle_diff(b, a) == Approx(-d).margin(1e-12));
  }
}

TEST_CASE("minutia construction wraps theta and rejects non-finite fields") {
  CHECK(Minutia(0, 0, two_pi).theta == 0.0);
  CHECK(Minutia(0, 0, -0.5).theta == Approx(two_pi - 0.5).margin(1e-12));
  CHECK(Minutia(0, 0, 13.0).theta >= 0.0);
  CHECK(Minutia(0, 0, 13.0).theta < two_pi);
  CHECK_THROWS_AS(Minutia(std::nan(""), 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(Minutia(0, HUGE_VAL, 0), std::invalid_argument);
}

TEST_CASE("rigid_transform rotates positions and advances directions") {
  const Minutia m(1.0, 0.0, 0.25);
  const Minutia r = rigid_transform(m, std::numbers::pi / 2.0, 0.0, 0.0);
  CHECK(r.x == Approx(0.0).margin(1e-12));
  CHECK(r.y == Approx(1.0).margin(1e-12));
  CHECK(r.theta == Approx(0.25 + std::numbers::pi / 2.0).margin(1e-12));

  // Rigid motions preserve pairwise distance and relative direction.
  Rng rng(43);
  for (int i = 0; i < 200; ++i) {
    const Minutia a = testsup::random_minutia(rng);
    const Minutia b = testsup::random_minutia(rng);
    const double beta = rng.next_uniform(0.0, two_pi);
    const double tx = rng.next_uniform(-50, 50), ty = rng.next_uniform(-50, 50);
    const Minutia ta = rigid_transform(a, beta, tx, ty);
    const Minutia tb = rigid_transform(b, beta, tx, ty);
    CHECK(distance(ta, tb) == Approx(distance(a, b)).margin(1e-9));
    CHECK(angle_diff(ta.theta, tb.theta) ==
          Approx(angle_diff(a.theta, b.theta)).margin(1e-9));
  }
}

TEST_CASE("patch frame maps patch coordinates into the image") {
  const PatchFrame f0(Minutia(100.0, 100.0, 0.0));
  auto [cx, cy] = f0.patch_to_image(64.0, 64.0);
  CHECK(cx == Approx(100.0).margin(1e-12));
  CHECK(cy == Approx(100.0).margin(1e-12));
  auto [px, py] = f0.patch_to_image(80.0, 64.0);
  CHECK(px == Approx(116.0).margin(1e-12));
  CHECK(py == Approx(100.0).margin(1e-12));

  // A quarter-turn frame sends +u along image +y.
  const PatchFrame f90(Minutia(100.0, 100.0, std::numbers::pi / 2.0));
  auto [qx, qy] = f90.patch_to_image(80.0, 64.0);
  CHECK(qx == Approx(100.0).margin(1e-9));
  CHECK(qy == Approx(116.0).margin(1e-9));
}

TEST_CASE("image_to_patch inverts patch_to_image") {
  Rng rng(44);
  for (int i = 0; i < 500; ++i) {
    const PatchFrame f(testsup::random_minutia(rng));
    const double u = rng.next_uniform(0.0, patch_size);
    const double v = rng.next_uniform(0.0, patch_size);
    auto [x, y] = f.patch_to_image(u, v);
    auto [u2, v2] = f.image_to_patch(x, y);
    CHECK(u2 == Approx(u).margin(1e-9));
    CHECK(v2 == Approx(v).margin(1e-9));
  }
}

TEST_CASE("cell centers sit on the 16 px grid around the minutia") {
  const PatchFrame f(Minutia(0.0, 0.0, 0.0));
  auto [ax, ay] = f.cell_center(3, 3);
  CHECK(ax == Approx(-8.0).margin(1e-12));
  CHECK(ay == Approx(-8.0).margin(1e-12));
  auto [bx, by] = f.cell_center(4, 4);
  CHECK(bx == Approx(8.0).margin(1e-12));
  CHECK(by == Approx(8.0).margin(1e-12));

  CHECK_THROWS_AS(f.cell_center(-1, 0), std::out_of_range);
  CHECK_THROWS_AS(f.cell_center(0, grid_size), std::out_of_range);

  // Neighboring cell centers are one cell apart in any frame.
  Rng rng(45);
  for (int i = 0; i < 100; ++i) {
    const PatchFrame rf(testsup::random_minutia(rng));
    const int row = static_cast<int>(rng.next_below(grid_size - 1));
    const int col = static_cast<int>(rng.next_below(grid_size - 1));
    auto [x0, y0] = rf.cell_center(row, col);
    auto [x1, y1] = rf.cell_center(row, col + 1);
    auto [x2, y2] = rf.cell_center(row + 1, col);
    CHECK(std::hypot(x1 - x0, y1 - y0) == Approx(cell_size).margin(1e-9));
    CHECK(std::hypot(x2 - x0, y2 - y0) == Approx(cell_size).margin(1e-9));
  }
}

TEST_CASE("portable generator is deterministic and well distributed") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng rng(7);
  double mean = 0.0, var = 0.0;
  constexpr int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double g = rng.next_gaussian();
    mean += g;
    var += g * g;
  }
  mean /= n;
  var = var / n - mean * mean;
  CHECK(std::fabs(mean) < 0.02);
  CHECK(var == Approx(1.0).margin(0.03));

  for (int i = 0; i < 1000; ++i) {
    CHECK(rng.next_below(10) < 10);
    const double d = rng.next_double();
    CHECK(d >= 0.0);
    CHECK(d < 1.0);
  }
}
