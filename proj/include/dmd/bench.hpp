#pragma once

#include <chrono>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "relaxation.hpp"
#include "serialization.hpp"
#include "template.hpp"

namespace dmd {

struct BenchReport {
  double pairs_per_second = 0.0;
  double template_bytes_avg = 0.0;
  Flavor flavor = Flavor::Float32;
  std::string preset;
};

/// Deterministic benchmark pair schedule over a pool of n templates: walks
/// the pool cyclically with a stride that grows each lap, so every pair is
/// fixed by (pool size, pair count) alone.
inline std::vector<std::pair<int, int>> bench_schedule(int pool_size,
                                                       int pair_count) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(pair_count);
  for (int k = 0; k < pair_count; ++k) {
    const int i = k % pool_size;
    const int stride = 1 + (k / pool_size) % (pool_size - 1);
    pairs.emplace_back(i, (i + stride) % pool_size);
  }
  return pairs;
}

/// Times single-threaded matching throughput over a template pool and
/// reports it together with the pool's mean serialized template size. A
/// small warm-up batch runs untimed first.
inline BenchReport bench_matching(const std::vector<Template>& pool,
                                  int pair_count,
                                  const MatchParams& prm = MatchParams{},
                                  const std::string& preset = "verifinger") {
  if (pool.size() < 2)
    throw std::invalid_argument("benchmark pool needs at least 2 templates");
  if (pair_count < 1) throw std::invalid_argument("pair count must be >= 1");
  const Flavor fl = flavor_of(pool.front());
  for (const Template& t : pool)
    if (flavor_of(t) != fl)
      throw std::invalid_argument("mixed template flavors in benchmark pool");

  const std::vector<std::pair<int, int>> schedule =
      bench_schedule(static_cast<int>(pool.size()), pair_count);

  const int warmup = std::min(pair_count, 16);
  double sink = 0.0;  // keeps the optimizer from discarding the matches
  for (int k = 0; k < warmup; ++k)
    sink += match_templates(pool[schedule[k].first], pool[schedule[k].second], prm).score;

  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& [i, j] : schedule)
    sink += match_templates(pool[i], pool[j], prm).score;
  const auto t1 = std::chrono::steady_clock::now();
  const double seconds = std::chrono::duration<double>(t1 - t0).count();

  BenchReport r;
  r.pairs_per_second = static_cast<double>(pair_count) / std::max(seconds, 1e-9);
  std::size_t bytes = 0;
  for (const Template& t : pool) bytes += serialized_size(t);
  r.template_bytes_avg = static_cast<double>(bytes) / pool.size();
  r.flavor = fl;
  r.preset = preset;
  volatile double guard = sink;  // defeat dead-code elimination of the matches
  (void)guard;
  return r;
}

/// One-line machine-parsable report.
inline std::string format_report(const BenchReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "pairs_per_second=%.2f template_bytes_avg=%.2f flavor=%s preset=%s",
                r.pairs_per_second, r.template_bytes_avg, flavor_name(r.flavor),
                r.preset.c_str());
  return buf;
}

}  // namespace dmd
