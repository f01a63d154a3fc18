#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "relaxation.hpp"
#include "template.hpp"

namespace dmd {

/// All query-vs-gallery scores of one identification experiment, with the
/// template identifiers (file stems) they came from. Two identifiers belong
/// to the same finger when their labels match.
struct ScoreMatrix {
  int rows = 0;  // queries
  int cols = 0;  // gallery entries
  std::vector<double> values;
  std::vector<std::string> query_ids;
  std::vector<std::string> gallery_ids;

  ScoreMatrix() = default;
  ScoreMatrix(int r, int c)
      : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, 0.0) {}

  double at(int q, int g) const { return values[static_cast<std::size_t>(q) * cols + g]; }
  double& at(int q, int g) { return values[static_cast<std::size_t>(q) * cols + g]; }

  void require_ids() const {
    if (query_ids.size() != static_cast<std::size_t>(rows) ||
        gallery_ids.size() != static_cast<std::size_t>(cols))
      throw std::invalid_argument("score matrix has no identifiers attached");
  }
};

/// Finger label of a template identifier: everything before the last '_',
/// which by convention separates finger id from impression id in file names
/// (e.g. "f00012_3" -> "f00012"). Identifiers without '_' are their own label.
inline std::string finger_label(const std::string& id) {
  const std::size_t pos = id.rfind('_');
  return pos == std::string::npos ? id : id.substr(0, pos);
}

/// Scores every query against every gallery template. Entries are
/// independent, so they are statically partitioned over `workers` threads;
/// the result is bitwise identical for any worker count. All templates must
/// share one flavor.
inline ScoreMatrix score_all(const std::vector<Template>& queries,
                             const std::vector<Template>& gallery,
                             const MatchParams& prm = MatchParams{},
                             int workers = 1) {
  if (queries.empty() || gallery.empty())
    throw std::invalid_argument("need at least one query and one gallery template");
  if (workers < 1) throw std::invalid_argument("worker count must be >= 1");
  const Flavor fl = flavor_of(queries.front());
  for (const Template& t : queries)
    if (flavor_of(t) != fl)
      throw std::invalid_argument("mixed template flavors in query set");
  for (const Template& t : gallery)
    if (flavor_of(t) != fl)
      throw std::invalid_argument("mixed template flavors in gallery set");

  ScoreMatrix sm(static_cast<int>(queries.size()), static_cast<int>(gallery.size()));
  const std::size_t total = sm.values.size();
  const std::size_t n_workers = std::min<std::size_t>(workers, total);
  const auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      const std::size_t q = idx / static_cast<std::size_t>(sm.cols);
      const std::size_t g = idx % static_cast<std::size_t>(sm.cols);
      sm.values[idx] = match_templates(queries[q], gallery[g], prm).score;
    }
  };
  if (n_workers <= 1) {
    run_range(0, total);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
      const std::size_t begin = total * w / n_workers;
      const std::size_t end = total * (w + 1) / n_workers;
      pool.emplace_back(run_range, begin, end);
    }
    for (std::thread& t : pool) t.join();
  }
  return sm;
}

namespace detail {

/// Gallery indices of one query row ordered best-first; ties keep the lower
/// gallery index, making ranks deterministic.
inline std::vector<int> row_order(const ScoreMatrix& sm, int q) {
  std::vector<int> order(sm.cols);
  for (int j = 0; j < sm.cols; ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (sm.at(q, a) != sm.at(q, b)) return sm.at(q, a) > sm.at(q, b);
    return a < b;
  });
  return order;
}

/// Rank of the best-placed genuine gallery entry for one query (1 = top).
/// Throws if the query has no genuine mate in the gallery.
inline int best_genuine_rank(const ScoreMatrix& sm, int q) {
  const std::string label = finger_label(sm.query_ids[q]);
  const std::vector<int> order = row_order(sm, q);
  for (int r = 0; r < sm.cols; ++r)
    if (finger_label(sm.gallery_ids[order[r]]) == label) return r + 1;
  throw std::invalid_argument("query '" + sm.query_ids[q] +
                              "' has no genuine mate in the gallery");
}

}  // namespace detail

/// Fraction of queries whose best genuine gallery entry ranks within the
/// top k. Requires identifiers and a genuine mate for every query.
inline double rank_k_accuracy(const ScoreMatrix& sm, int k) {
  sm.require_ids();
  if (k < 1) throw std::invalid_argument("rank must be >= 1");
  int hits = 0;
  for (int q = 0; q < sm.rows; ++q)
    if (detail::best_genuine_rank(sm, q) <= k) ++hits;
  return static_cast<double>(hits) / sm.rows;
}

/// Cumulative match characteristic: (rank, accuracy) for ranks 1..max_rank.
inline std::vector<std::pair<int, double>> cmc_curve(const ScoreMatrix& sm,
                                                     int max_rank) {
  sm.require_ids();
  if (max_rank < 1 || max_rank > sm.cols)
    throw std::invalid_argument("max rank must lie in [1, gallery size]");
  std::vector<int> hits(max_rank + 1, 0);
  for (int q = 0; q < sm.rows; ++q) {
    const int r = detail::best_genuine_rank(sm, q);
    if (r <= max_rank) ++hits[r];
  }
  std::vector<std::pair<int, double>> curve;
  curve.reserve(max_rank);
  int acc = 0;
  for (int r = 1; r <= max_rank; ++r) {
    acc += hits[r];
    curve.emplace_back(r, static_cast<double>(acc) / sm.rows);
  }
  return curve;
}

/// Splits a labeled score matrix into genuine (same finger) and impostor
/// (different finger) score lists, in row-major matrix order.
inline std::pair<std::vector<double>, std::vector<double>> split_scores(
    const ScoreMatrix& sm) {
  sm.require_ids();
  std::vector<double> genuine, impostor;
  for (int q = 0; q < sm.rows; ++q) {
    const std::string label = finger_label(sm.query_ids[q]);
    for (int g = 0; g < sm.cols; ++g) {
      if (finger_label(sm.gallery_ids[g]) == label)
        genuine.push_back(sm.at(q, g));
      else
        impostor.push_back(sm.at(q, g));
    }
  }
  return {std::move(genuine), std::move(impostor)};
}

/// True accept rate at a false accept budget: the score threshold is the
/// smallest observed impostor score accepted by at most floor(far * |I|)
/// impostors; with a budget below one impostor, the threshold moves just
/// above the highest impostor score. Returns the fraction of genuine scores
/// at or above the threshold.
inline double tar_at_far(const std::vector<double>& genuine,
                         const std::vector<double>& impostor, double far) {
  if (genuine.empty() || impostor.empty())
    throw std::invalid_argument("need non-empty genuine and impostor score lists");
  if (!(far > 0.0 && far < 1.0))
    throw std::invalid_argument("false accept rate must lie in (0, 1)");
  // The epsilon absorbs decimal fractions that are not exact in binary
  // (e.g. 0.3 * 10 rounding to 2.999...).
  const std::size_t budget = static_cast<std::size_t>(
      std::floor(far * static_cast<double>(impostor.size()) + 1e-9));

  std::vector<double> imp = impostor;
  std::sort(imp.begin(), imp.end(), std::greater<double>());
  double threshold;
  bool above_all = false;
  if (budget == 0) {
    above_all = true;
    threshold = imp.front();
  } else {
    // Walk impostor scores high to low; accepted(t) = #(impostor >= t) is
    // the number of entries with value >= t, so candidate thresholds are the
    // distinct impostor values themselves.
    threshold = imp.front();
    bool found = false;
    std::size_t i = 0;
    while (i < imp.size()) {
      std::size_t j = i;
      while (j < imp.size() && imp[j] == imp[i]) ++j;
      if (j <= budget) {  // accepting everything >= imp[i] stays in budget
        threshold = imp[i];
        found = true;
      } else {
        break;
      }
      i = j;
    }
    if (!found) {  // even the top impostor value overshoots the budget
      above_all = true;
      threshold = imp.front();
    }
  }
  std::size_t accepted = 0;
  for (double gsc : genuine)
    if (above_all ? gsc > threshold : gsc >= threshold) ++accepted;
  return static_cast<double>(accepted) / genuine.size();
}

/// Detection-error tradeoff: (false accept rate, false non-match rate) at a
/// rising sweep of thresholds drawn from the observed scores, evenly
/// subsampled to at most `points` entries. FAR is non-increasing along the
/// returned curve.
inline std::vector<std::pair<double, double>> det_curve(
    const std::vector<double>& genuine, const std::vector<double>& impostor,
    int points = 100) {
  if (genuine.empty() || impostor.empty())
    throw std::invalid_argument("need non-empty genuine and impostor score lists");
  if (points < 1) throw std::invalid_argument("need at least one curve point");
  std::vector<double> thresholds;
  thresholds.reserve(genuine.size() + impostor.size());
  thresholds.insert(thresholds.end(), genuine.begin(), genuine.end());
  thresholds.insert(thresholds.end(), impostor.begin(), impostor.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());
  std::vector<double> picked;
  if (static_cast<int>(thresholds.size()) <= points || points == 1) {
    picked = points == 1 ? std::vector<double>{thresholds.front()} : thresholds;
  } else {
    picked.reserve(points);
    const std::size_t last = thresholds.size() - 1;
    for (int i = 0; i < points; ++i) {
      const std::size_t idx = static_cast<std::size_t>(
          std::llround(static_cast<double>(i) * last / (points - 1)));
      picked.push_back(thresholds[idx]);
    }
    picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
  }
  std::vector<std::pair<double, double>> curve;
  curve.reserve(picked.size());
  for (double t : picked) {
    std::size_t fa = 0, fnm = 0;
    for (double s : impostor)
      if (s >= t) ++fa;
    for (double s : genuine)
      if (s < t) ++fnm;
    curve.emplace_back(static_cast<double>(fa) / impostor.size(),
                       static_cast<double>(fnm) / genuine.size());
  }
  return curve;
}

namespace detail {

inline std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9f", v);
  return buf;
}

}  // namespace detail

/// Writes a labeled score matrix as CSV: a header row of gallery
/// identifiers, then one row per query with its identifier first. Scores
/// carry 9 decimals, enough to keep ranking decisions stable on re-read.
inline void write_scores_csv(const ScoreMatrix& sm, std::ostream& os) {
  sm.require_ids();
  os << "query";
  for (const std::string& id : sm.gallery_ids) os << ',' << id;
  os << '\n';
  for (int q = 0; q < sm.rows; ++q) {
    os << sm.query_ids[q];
    for (int g = 0; g < sm.cols; ++g) os << ',' << detail::format_score(sm.at(q, g));
    os << '\n';
  }
  if (!os) throw std::runtime_error("could not write scores CSV");
}

/// Parses a CSV produced by write_scores_csv.
inline ScoreMatrix read_scores_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("scores CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header[0] != "query")
    throw std::runtime_error("malformed scores CSV header");

  ScoreMatrix sm;
  sm.cols = static_cast<int>(header.size()) - 1;
  sm.gallery_ids.assign(header.begin() + 1, header.end());
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    if (!std::getline(ls, cell, ','))
      throw std::runtime_error("malformed scores CSV row");
    sm.query_ids.push_back(cell);
    int got = 0;
    while (std::getline(ls, cell, ',')) {
      std::size_t used = 0;
      double v;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw std::runtime_error("malformed score value '" + cell + "'");
      }
      if (used != cell.size())
        throw std::runtime_error("malformed score value '" + cell + "'");
      sm.values.push_back(v);
      ++got;
    }
    if (got != sm.cols)
      throw std::runtime_error("scores CSV row has wrong column count");
    ++sm.rows;
  }
  if (sm.rows == 0) throw std::runtime_error("scores CSV has no data rows");
  return sm;
}

}  // namespace dmd
