#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "hungarian.hpp"
#include "similarity.hpp"
#include "template.hpp"

namespace dmd {

/// Tunable knobs of the matcher. The two presets reflect the extractors the
/// pipeline is commonly paired with; geometric tolerances are shared.
struct MatchParams {
  // Adaptive pair-count sigmoid: n = n_min + round((n_max - n_min) * s(m))
  // where m = min(query size, gallery size).
  int n_min = 4;
  int n_max = 12;
  double tau = 0.4;
  double mu = 20.0;

  // Relaxation schedule.
  int relax_iterations = 5;
  double relax_weight = 0.5;

  // Pairwise geometric compatibility sigmoids: midpoint and slope for the
  // distance residual (px) and the two angular residuals (radians).
  double mu_d = 15.0;
  double tau_d = 0.4;
  double mu_a1 = std::numbers::pi / 6.0;
  double tau_a1 = 9.0;
  double mu_a2 = std::numbers::pi / 6.0;
  double tau_a2 = 9.0;

  void validate() const {
    if (n_min < 1 || n_max < n_min)
      throw std::invalid_argument("need 1 <= n_min <= n_max");
    if (relax_iterations < 0)
      throw std::invalid_argument("relaxation iteration count must be >= 0");
    if (!(relax_weight >= 0.0 && relax_weight <= 1.0))
      throw std::invalid_argument("relaxation weight must lie in [0, 1]");
  }
};

/// Defaults tuned for VeriFinger-style minutiae.
inline MatchParams verifinger_params() { return MatchParams{}; }

/// Defaults tuned for FingerNet/FDD-style minutiae.
inline MatchParams fdd_params() {
  MatchParams p;
  p.n_min = 6;
  p.n_max = 14;
  p.tau = 0.3;
  p.mu = 20.0;
  return p;
}

inline MatchParams preset_params(const std::string& name) {
  if (name == "verifinger") return verifinger_params();
  if (name == "fdd") return fdd_params();
  throw std::invalid_argument("unknown preset '" + name +
                              "' (expected verifinger or fdd)");
}

/// How many of the best relaxed pair similarities enter the final average.
/// Grows smoothly with the smaller template size m = min(r, p); rounding is
/// half away from zero.
inline int adaptive_top_n(int r, int p, const MatchParams& prm) {
  const double m = static_cast<double>(std::min(r, p));
  const double s = 1.0 / (1.0 + std::exp(-prm.tau * (m - prm.mu)));
  return prm.n_min + static_cast<int>(std::llround((prm.n_max - prm.n_min) * s));
}

namespace detail {

/// Descending logistic gate: 1 at v << mid, 0 at v >> mid, exactly 0.5 at
/// the midpoint.
inline double gate(double v, double mid, double slope) {
  return 1.0 / (1.0 + std::exp(slope * (v - mid)));
}

}  // namespace detail

/// Geometric compatibility of matching (a -> c) alongside (b -> d): the
/// product of three gates on how well the pair (a, b) agrees with (c, d) in
/// segment length, relative minutia direction, and the direction of the
/// connecting segment as seen from the first minutia. 1 means perfectly
/// consistent, 0 means incompatible.
inline double pair_compatibility(const Minutia& a, const Minutia& b,
                                 const Minutia& c, const Minutia& d,
                                 const MatchParams& prm) {
  const double res_d = std::fabs(distance(a, b) - distance(c, d));
  const double res_dir = std::fabs(
      angle_diff(angle_diff(a.theta, b.theta), angle_diff(c.theta, d.theta)));
  const double phi_ab = angle_diff(std::atan2(b.y - a.y, b.x - a.x), a.theta);
  const double phi_cd = angle_diff(std::atan2(d.y - c.y, d.x - c.x), c.theta);
  const double res_seg = std::fabs(angle_diff(phi_ab, phi_cd));
  return detail::gate(res_d, prm.mu_d, prm.tau_d) *
         detail::gate(res_dir, prm.mu_a1, prm.tau_a1) *
         detail::gate(res_seg, prm.mu_a2, prm.tau_a2);
}

/// Iteratively blends each assigned pair's similarity with the
/// compatibility-weighted mean of all other pairs' similarities:
///   next(k) = w * cur(k) + (1 - w) * sum_{l != k} rho(k, l) * cur(l) / (n - 1).
/// Geometrically consistent pair sets keep their scores; inconsistent ones
/// decay toward zero. With fewer than two pairs there are no neighbors and
/// the input scores are returned unchanged.
inline std::vector<double> relax(const SimilarityMatrix& s1,
                                 const std::vector<std::pair<int, int>>& assignment,
                                 const std::vector<Minutia>& query,
                                 const std::vector<Minutia>& gallery,
                                 const MatchParams& prm) {
  const std::size_t n = assignment.size();
  std::vector<double> cur(n);
  for (std::size_t k = 0; k < n; ++k)
    cur[k] = s1.at(assignment[k].first, assignment[k].second);
  if (n <= 1 || prm.relax_iterations == 0) return cur;

  // rho is not symmetric: the segment-direction gate is anchored at the
  // first minutia of each pair, so compute the full n x n table.
  std::vector<double> rho(n * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const Minutia& qa = query[assignment[k].first];
    const Minutia& ga = gallery[assignment[k].second];
    for (std::size_t l = 0; l < n; ++l) {
      if (l == k) continue;
      rho[k * n + l] = pair_compatibility(qa, query[assignment[l].first], ga,
                                          gallery[assignment[l].second], prm);
    }
  }

  const double w = prm.relax_weight;
  const double inv = 1.0 / static_cast<double>(n - 1);
  std::vector<double> next(n);
  for (int t = 0; t < prm.relax_iterations; ++t) {
    for (std::size_t k = 0; k < n; ++k) {
      double acc = 0.0;
      for (std::size_t l = 0; l < n; ++l) acc += rho[k * n + l] * cur[l];
      next[k] = w * cur[k] + (1.0 - w) * acc * inv;
    }
    cur.swap(next);
  }
  return cur;
}

/// One matched (query record, gallery record) pair with its raw and relaxed
/// similarities.
struct ScoredPair {
  int query_index = 0;
  int gallery_index = 0;
  double s1 = 0.0;  // local descriptor similarity
  double s2 = 0.0;  // similarity after relaxation
};

struct MatchResult {
  double score = 0.0;
  int n_m = 0;  // how many pairs the score averages over (before clamping)
  std::vector<ScoredPair> pairs;       // the averaged pairs, best first
  std::vector<ScoredPair> assignment;  // full assignment, query index order
};

/// Full comparison of two templates: local similarities, optimal one-to-one
/// assignment, geometric relaxation, then the mean of the best relaxed pair
/// similarities. Both templates must be non-empty and share flavor/channels.
template <class RecordT>
MatchResult match_templates(const BasicTemplate<RecordT>& q,
                            const BasicTemplate<RecordT>& g,
                            const MatchParams& prm = MatchParams{}) {
  prm.validate();
  const SimilarityMatrix s1 = similarity_matrix(q, g);
  const std::vector<std::pair<int, int>> lap = assign(s1);
  const std::vector<Minutia> mq = minutiae_of(q);
  const std::vector<Minutia> mg = minutiae_of(g);
  const std::vector<double> s2 = relax(s1, lap, mq, mg, prm);

  MatchResult res;
  res.assignment.reserve(lap.size());
  for (std::size_t k = 0; k < lap.size(); ++k)
    res.assignment.push_back(
        {lap[k].first, lap[k].second, s1.at(lap[k].first, lap[k].second), s2[k]});

  res.n_m = adaptive_top_n(s1.rows, s1.cols, prm);
  std::vector<ScoredPair> ranked = res.assignment;
  std::sort(ranked.begin(), ranked.end(),
            [](const ScoredPair& a, const ScoredPair& b) {
              if (a.s2 != b.s2) return a.s2 > b.s2;
              if (a.query_index != b.query_index)
                return a.query_index < b.query_index;
              return a.gallery_index < b.gallery_index;
            });
  const std::size_t take =
      std::min<std::size_t>(static_cast<std::size_t>(res.n_m), ranked.size());
  ranked.resize(take);
  double acc = 0.0;
  for (const ScoredPair& p : ranked) acc += p.s2;
  res.score = acc / static_cast<double>(take);
  res.pairs = std::move(ranked);
  return res;
}

inline MatchResult match_templates(const Template& q, const Template& g,
                                   const MatchParams& prm = MatchParams{}) {
  if (flavor_of(q) != flavor_of(g))
    throw std::invalid_argument("cannot match templates of different flavors");
  if (std::holds_alternative<FloatTemplate>(q))
    return match_templates(std::get<FloatTemplate>(q), std::get<FloatTemplate>(g), prm);
  return match_templates(std::get<BinaryTemplate>(q), std::get<BinaryTemplate>(g), prm);
}

}  // namespace dmd
