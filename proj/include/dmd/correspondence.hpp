#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rng.hpp"
#include "similarity.hpp"
#include "template.hpp"

namespace dmd {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// 2D affine map p -> A p + b with A = [[a11 a12], [a21 a22]], b = (tx, ty).
struct AffineTransform2D {
  double a11 = 1.0, a12 = 0.0;
  double a21 = 0.0, a22 = 1.0;
  double tx = 0.0, ty = 0.0;

  Point2 apply(const Point2& p) const {
    return {a11 * p.x + a12 * p.y + tx, a21 * p.x + a22 * p.y + ty};
  }

  double det() const { return a11 * a22 - a12 * a21; }
};

struct Correspondence {
  int query_index = 0;
  int gallery_index = 0;
  double score = 0.0;  // local similarity that proposed this pair
};

/// Proposes candidate minutia pairs from local similarities alone: for each
/// query record, its top_k most similar gallery records. Ties prefer the
/// lower gallery index. Output is ordered by query index, then descending
/// similarity.
inline std::vector<Correspondence> initial_correspondences(const Template& q,
                                                           const Template& g,
                                                           int top_k = 2) {
  if (top_k < 1) throw std::invalid_argument("top_k must be >= 1");
  const SimilarityMatrix s = similarity_matrix(q, g);
  std::vector<Correspondence> out;
  out.reserve(static_cast<std::size_t>(s.rows) * std::min(top_k, s.cols));
  std::vector<int> order(s.cols);
  for (int i = 0; i < s.rows; ++i) {
    for (int j = 0; j < s.cols; ++j) order[j] = j;
    const int take = std::min(top_k, s.cols);
    std::partial_sort(order.begin(), order.begin() + take, order.end(),
                      [&](int a, int b) {
                        if (s.at(i, a) != s.at(i, b)) return s.at(i, a) > s.at(i, b);
                        return a < b;
                      });
    for (int r = 0; r < take; ++r)
      out.push_back({i, order[r], s.at(i, order[r])});
  }
  return out;
}

struct PointPair {
  Point2 query;
  Point2 gallery;
};

/// Positions of proposed pairs, in correspondence order.
inline std::vector<PointPair> correspondence_points(
    const std::vector<Correspondence>& corr, const Template& q,
    const Template& g) {
  const std::vector<Minutia> mq = minutiae_of(q);
  const std::vector<Minutia> mg = minutiae_of(g);
  std::vector<PointPair> out;
  out.reserve(corr.size());
  for (const Correspondence& c : corr) {
    const Minutia& a = mq.at(static_cast<std::size_t>(c.query_index));
    const Minutia& b = mg.at(static_cast<std::size_t>(c.gallery_index));
    out.push_back({{a.x, a.y}, {b.x, b.y}});
  }
  return out;
}

struct RansacResult {
  AffineTransform2D model;
  std::vector<int> inliers;  // indices into the input pair list, ascending
};

namespace detail {

/// Twice the signed area of the triangle (a, b, c).
inline double doubled_area(const Point2& a, const Point2& b, const Point2& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

/// Exact affine map sending the three query points onto the three gallery
/// points. The caller guarantees the query triangle is non-degenerate.
inline AffineTransform2D affine_from_three(const PointPair& p0,
                                           const PointPair& p1,
                                           const PointPair& p2) {
  const double d = doubled_area(p0.query, p1.query, p2.query);
  // Solve the two 3x3 systems (one per output coordinate) by Cramer's rule;
  // both share the query-point coefficient matrix whose determinant is d.
  const auto solve_row = [&](double g0, double g1, double g2) {
    const double q0x = p0.query.x, q0y = p0.query.y;
    const double q1x = p1.query.x, q1y = p1.query.y;
    const double q2x = p2.query.x, q2y = p2.query.y;
    const double ca = g0 * (q1y - q2y) + g1 * (q2y - q0y) + g2 * (q0y - q1y);
    const double cb = g0 * (q2x - q1x) + g1 * (q0x - q2x) + g2 * (q1x - q0x);
    const double cc = g0 * (q1x * q2y - q2x * q1y) +
                      g1 * (q2x * q0y - q0x * q2y) +
                      g2 * (q0x * q1y - q1x * q0y);
    return std::array<double, 3>{ca / d, cb / d, cc / d};
  };
  const auto rx = solve_row(p0.gallery.x, p1.gallery.x, p2.gallery.x);
  const auto ry = solve_row(p0.gallery.y, p1.gallery.y, p2.gallery.y);
  return AffineTransform2D{rx[0], rx[1], ry[0], ry[1], rx[2], ry[2]};
}

inline std::vector<int> inliers_of(const AffineTransform2D& model,
                                   const std::vector<PointPair>& pairs,
                                   double tol) {
  std::vector<int> in;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const Point2 p = model.apply(pairs[k].query);
    if (std::hypot(p.x - pairs[k].gallery.x, p.y - pairs[k].gallery.y) <= tol)
      in.push_back(static_cast<int>(k));
  }
  return in;
}

/// Least-squares affine fit over the given pair subset. Returns false when
/// the normal equations are singular (all points collinear).
inline bool affine_least_squares(const std::vector<PointPair>& pairs,
                                 const std::vector<int>& subset,
                                 AffineTransform2D& out) {
  // Normal equations of min  sum || A q + b - g ||^2 ; both output rows
  // share the 3x3 Gram matrix of (qx, qy, 1).
  double sxx = 0, sxy = 0, sx = 0, syy = 0, sy = 0, n = 0;
  double gx_x = 0, gx_y = 0, gx_1 = 0, gy_x = 0, gy_y = 0, gy_1 = 0;
  for (int k : subset) {
    const Point2& q = pairs[static_cast<std::size_t>(k)].query;
    const Point2& g = pairs[static_cast<std::size_t>(k)].gallery;
    sxx += q.x * q.x;
    sxy += q.x * q.y;
    sx += q.x;
    syy += q.y * q.y;
    sy += q.y;
    n += 1.0;
    gx_x += g.x * q.x;
    gx_y += g.x * q.y;
    gx_1 += g.x;
    gy_x += g.y * q.x;
    gy_y += g.y * q.y;
    gy_1 += g.y;
  }
  const double det = sxx * (syy * n - sy * sy) - sxy * (sxy * n - sy * sx) +
                     sx * (sxy * sy - syy * sx);
  if (std::fabs(det) < 1e-9) return false;
  const auto solve = [&](double r0, double r1, double r2) {
    // Cramer's rule against the shared Gram matrix.
    const double d0 = r0 * (syy * n - sy * sy) - sxy * (r1 * n - r2 * sy) +
                      sx * (r1 * sy - r2 * syy);
    const double d1 = sxx * (r1 * n - r2 * sy) - r0 * (sxy * n - sy * sx) +
                      sx * (sxy * r2 - r1 * sx);
    const double d2 = sxx * (syy * r2 - sy * r1) - sxy * (sxy * r2 - r1 * sx) +
                      r0 * (sxy * sy - syy * sx);
    return std::array<double, 3>{d0 / det, d1 / det, d2 / det};
  };
  const auto rx = solve(gx_x, gx_y, gx_1);
  const auto ry = solve(gy_x, gy_y, gy_1);
  out = AffineTransform2D{rx[0], rx[1], ry[0], ry[1], rx[2], ry[2]};
  return true;
}

}  // namespace detail

/// Robust affine estimation from noisy pair proposals. Each iteration draws
/// a 3-pair minimal sample from its own derived random stream, fits the
/// exact affine map, and scores it by inlier count (residual <= inlier_tol
/// px); degenerate samples (near-collinear query triangle or singular map)
/// are skipped. The best model is refined by a least-squares fit over its
/// inliers, kept only if it does not lose inliers. Throws
/// std::invalid_argument for fewer than 3 pairs and std::runtime_error when
/// every sample was degenerate.
inline RansacResult ransac_affine(const std::vector<PointPair>& pairs,
                                  int iterations = 500, double inlier_tol = 8.0,
                                  std::uint64_t seed = 0) {
  if (pairs.size() < 3)
    throw std::invalid_argument("affine estimation needs at least 3 pairs");
  if (iterations < 1) throw std::invalid_argument("need at least 1 iteration");
  if (!(inlier_tol > 0.0)) throw std::invalid_argument("inlier tolerance must be positive");

  constexpr double min_doubled_area = 2e-6;  // triangle area below 1e-6 px^2
  const std::uint64_t n = pairs.size();
  bool have_best = false;
  AffineTransform2D best_model;
  std::vector<int> best_inliers;

  for (int it = 0; it < iterations; ++it) {
    Rng rng = substream(seed, static_cast<std::uint64_t>(it));
    std::uint64_t a = rng.next_below(n), b, c;
    do b = rng.next_below(n); while (b == a);
    do c = rng.next_below(n); while (c == a || c == b);
    const PointPair& p0 = pairs[a];
    const PointPair& p1 = pairs[b];
    const PointPair& p2 = pairs[c];
    if (std::fabs(detail::doubled_area(p0.query, p1.query, p2.query)) <
        min_doubled_area)
      continue;
    const AffineTransform2D model = detail::affine_from_three(p0, p1, p2);
    if (std::fabs(model.det()) < 1e-12) continue;  // gallery side degenerate
    std::vector<int> in = detail::inliers_of(model, pairs, inlier_tol);
    if (!have_best || in.size() > best_inliers.size()) {
      have_best = true;
      best_model = model;
      best_inliers = std::move(in);
    }
  }
  if (!have_best)
    throw std::runtime_error(
        "all affine samples were degenerate (collinear points)");

  AffineTransform2D refined;
  if (detail::affine_least_squares(pairs, best_inliers, refined) &&
      std::fabs(refined.det()) > 1e-12) {
    std::vector<int> in = detail::inliers_of(refined, pairs, inlier_tol);
    if (in.size() >= best_inliers.size()) {
      best_model = refined;
      best_inliers = std::move(in);
    }
  }
  return RansacResult{best_model, std::move(best_inliers)};
}

/// Greedy spread-maximizing subset: starting from `start`, repeatedly picks
/// the point farthest from everything chosen so far (ties to the lowest
/// index). Returns indices in selection order; k >= |points| returns all
/// indices in ascending order.
inline std::vector<int> farthest_point_sampling(const std::vector<Point2>& points,
                                                int k, int start = 0) {
  const int n = static_cast<int>(points.size());
  if (n == 0) throw std::invalid_argument("cannot sample from an empty point set");
  if (start < 0 || start >= n) throw std::invalid_argument("start index out of range");
  if (k < 1) throw std::invalid_argument("subset size must be >= 1");
  if (k >= n) {
    std::vector<int> all(points.size());
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    return all;
  }
  std::vector<int> chosen{start};
  std::vector<char> taken(points.size(), 0);
  taken[start] = 1;
  std::vector<double> min_dist(points.size());
  for (int i = 0; i < n; ++i)
    min_dist[i] = std::hypot(points[i].x - points[start].x,
                             points[i].y - points[start].y);
  while (static_cast<int>(chosen.size()) < k) {
    int far_idx = -1;
    double far_dist = -1.0;
    for (int i = 0; i < n; ++i) {
      if (taken[i]) continue;
      if (min_dist[i] > far_dist) {  // strict: ties keep the lowest index
        far_dist = min_dist[i];
        far_idx = i;
      }
    }
    chosen.push_back(far_idx);
    taken[far_idx] = 1;
    for (int i = 0; i < n; ++i)
      min_dist[i] = std::min(min_dist[i],
                             std::hypot(points[i].x - points[far_idx].x,
                                        points[i].y - points[far_idx].y));
  }
  return chosen;
}

}  // namespace dmd
