#pragma once

// Shared helpers for the test suite: deterministic random builders for
// records and templates, all driven by the library's own seeded generator so
// every test is reproducible.

#include <dmd/dmd.hpp>

namespace testsup {

/// Minutia whose fields survive f32 storage unchanged.
inline dmd::Minutia random_minutia(dmd::Rng& rng, double span = 512.0) {
  const float x = dmd::f32_round(rng.next_uniform(0.0, span));
  const float y = dmd::f32_round(rng.next_uniform(0.0, span));
  float t = dmd::f32_round(rng.next_uniform(0.0, dmd::two_pi));
  if (static_cast<double>(t) >= dmd::two_pi) t = 0.0f;
  return dmd::Minutia(x, y, t);
}

inline dmd::DescriptorGrid random_descriptor(dmd::Rng& rng, int channels) {
  dmd::DescriptorGrid d(channels);
  for (float& v : d.values) v = static_cast<float>(rng.next_gaussian());
  return d;
}

/// Soft mask with weights uniform in [0, 1].
inline dmd::ForegroundMask random_soft_mask(dmd::Rng& rng) {
  dmd::ForegroundMask m;
  for (float& v : m.values) v = static_cast<float>(rng.next_double());
  return m;
}

/// Hard 0/1 mask where each cell is foreground with probability p.
inline dmd::ForegroundMask random_hard_mask(dmd::Rng& rng, double p = 0.7) {
  dmd::ForegroundMask m;
  for (float& v : m.values) v = rng.next_bernoulli(p) ? 1.0f : 0.0f;
  return m;
}

inline dmd::BitDescriptor random_bit_descriptor(dmd::Rng& rng, int channels) {
  dmd::BitDescriptor d(channels);
  for (std::uint8_t& b : d.bytes) b = static_cast<std::uint8_t>(rng.next_below(256));
  return d;
}

inline dmd::BitMask random_bit_mask(dmd::Rng& rng, double p = 0.7) {
  dmd::BitMask m;
  for (int row = 0; row < dmd::grid_size; ++row)
    for (int col = 0; col < dmd::grid_size; ++col)
      m.set_bit(row, col, rng.next_bernoulli(p));
  return m;
}

inline dmd::FloatRecord random_float_record(dmd::Rng& rng, int channels,
                                            bool hard_mask = false) {
  dmd::FloatRecord r;
  r.minutia = random_minutia(rng);
  r.descriptor = random_descriptor(rng, channels);
  r.mask = hard_mask ? random_hard_mask(rng) : random_soft_mask(rng);
  return r;
}

inline dmd::BinaryRecord random_binary_record(dmd::Rng& rng, int channels) {
  dmd::BinaryRecord r;
  r.minutia = random_minutia(rng);
  r.descriptor = random_bit_descriptor(rng, channels);
  r.mask = random_bit_mask(rng);
  return r;
}

inline dmd::FloatTemplate random_float_template(dmd::Rng& rng, int n_records,
                                                int channels,
                                                const std::string& tag = "test") {
  dmd::FloatTemplate t;
  t.channels = channels;
  t.source_tag = tag;
  for (int i = 0; i < n_records; ++i)
    t.records.push_back(random_float_record(rng, channels));
  return t;
}

inline dmd::BinaryTemplate random_binary_template(dmd::Rng& rng, int n_records,
                                                  int channels,
                                                  const std::string& tag = "test") {
  dmd::BinaryTemplate t;
  t.channels = channels;
  t.source_tag = tag;
  for (int i = 0; i < n_records; ++i)
    t.records.push_back(random_binary_record(rng, channels));
  return t;
}

}  // namespace testsup
