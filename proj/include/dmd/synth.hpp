#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "rng.hpp"
#include "template.hpp"

namespace dmd {

inline constexpr double synth_canvas = 512.0;      // px, square working area
inline constexpr double synth_min_separation = 12.0;  // px between minutiae

/// Ground-truth finger: canonical minutiae plus the noise-free descriptor
/// each impression's observation is perturbed from. Masks are all-ones, so
/// self-modulating the descriptors by them changes nothing.
struct FingerModel {
  std::uint64_t finger_id = 0;
  int channels = default_channels;
  std::vector<Minutia> minutiae;
  std::vector<DescriptorGrid> descriptors;
  std::vector<ForegroundMask> masks;
};

namespace detail {

/// Snaps a minutia to values that survive f32 storage unchanged, so a
/// template built from it round-trips through serialization bit-for-bit.
inline Minutia storage_exact(const Minutia& m) {
  const float x = f32_round(m.x);
  const float y = f32_round(m.y);
  float t = f32_round(m.theta);
  if (static_cast<double>(t) >= two_pi) t = 0.0f;
  return Minutia(x, y, t);
}

inline DescriptorGrid random_descriptor(Rng& rng, int channels) {
  DescriptorGrid d(channels);
  for (float& v : d.values) v = static_cast<float>(rng.next_gaussian());
  return d;
}

}  // namespace detail

/// Deterministically generates a finger: n_minutiae positions uniform on the
/// canvas subject to a minimum pairwise separation (rejection sampling with
/// bounded retries), uniform orientations, and i.i.d. standard normal
/// descriptor values. The same (finger_id, seed) always yields the same
/// finger regardless of how many other fingers were generated.
inline FingerModel generate_finger(std::uint64_t finger_id, int n_minutiae,
                                   std::uint64_t seed,
                                   int channels = default_channels) {
  if (n_minutiae < 1) throw std::invalid_argument("need at least one minutia");
  if (channels < 1) throw std::invalid_argument("need at least one channel");
  FingerModel f;
  f.finger_id = finger_id;
  f.channels = channels;
  Rng rng(derive_seed(seed, mix64(finger_id)));

  constexpr int max_attempts_per_point = 10000;
  for (int i = 0; i < n_minutiae; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < max_attempts_per_point; ++attempt) {
      const Minutia cand = detail::storage_exact(
          Minutia(rng.next_uniform(0.0, synth_canvas),
                  rng.next_uniform(0.0, synth_canvas),
                  rng.next_uniform(0.0, two_pi)));
      bool clear = true;
      for (const Minutia& m : f.minutiae)
        if (distance(cand, m) < synth_min_separation) {
          clear = false;
          break;
        }
      if (clear) {
        f.minutiae.push_back(cand);
        placed = true;
        break;
      }
    }
    if (!placed)
      throw std::runtime_error(
          "could not place minutiae at the required separation");
  }
  for (int i = 0; i < n_minutiae; ++i) {
    f.descriptors.push_back(detail::random_descriptor(rng, channels));
    f.masks.push_back(full_mask());
  }
  return f;
}

/// Degradations applied when observing a finger. Rates are probabilities in
/// [0, 1); sigma is the standard deviation of additive descriptor noise.
struct ImpressionParams {
  double rotation = 0.0;  // radians, applied to positions and directions
  double dx = 0.0;        // px translation after rotation
  double dy = 0.0;
  double noise_sigma = 0.0;
  double mask_erosion = 0.0;  // fraction of border rows/cols zeroed per mask
  double dropout = 0.0;       // chance a true minutia goes undetected
  double spurious = 0.0;      // expected false detections per true minutia
  std::uint64_t seed = 0;

  void validate() const {
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
    const auto rate_ok = [](double r) { return r >= 0.0 && r < 1.0; };
    if (!rate_ok(mask_erosion) || !rate_ok(dropout) || !rate_ok(spurious))
      throw std::invalid_argument("rates must lie in [0, 1)");
  }
};

/// An observed impression and which model minutia each surviving record came
/// from. Spurious records have no entry.
struct Impression {
  FloatTemplate tpl;
  std::vector<std::pair<int, int>> correspondences;  // (record idx, model idx)
};

namespace detail {

/// Zeroes round(fraction * 8) full rows or columns starting from one
/// randomly chosen border side.
inline ForegroundMask eroded_mask(Rng& rng, double fraction) {
  ForegroundMask m = full_mask();
  const int lines = static_cast<int>(std::llround(fraction * grid_size));
  if (lines <= 0) return m;
  const std::uint64_t side = rng.next_below(4);  // 0=top 1=bottom 2=left 3=right
  for (int k = 0; k < std::min(lines, grid_size); ++k)
    for (int t = 0; t < grid_size; ++t) {
      if (side == 0) m.at(k, t) = 0.0f;
      if (side == 1) m.at(grid_size - 1 - k, t) = 0.0f;
      if (side == 2) m.at(t, k) = 0.0f;
      if (side == 3) m.at(t, grid_size - 1 - k) = 0.0f;
    }
  return m;
}

inline DescriptorGrid noisy_descriptor(Rng& rng, const DescriptorGrid& base,
                                       double sigma) {
  DescriptorGrid d = base;
  if (sigma > 0.0)
    for (float& v : d.values)
      v = static_cast<float>(v + sigma * rng.next_gaussian());
  return d;
}

}  // namespace detail

/// Observes a finger once: drops each true minutia with probability
/// `dropout`, poses survivors rigidly, perturbs their descriptors with
/// Gaussian noise, erodes their masks from a random border, then injects
/// spurious minutiae (one Bernoulli(spurious) trial per true minutia) with
/// fresh random descriptors placed uniformly on the canvas before posing.
/// Deterministic in (finger_id, params.seed). Throws std::runtime_error if
/// every minutia dropped out.
inline Impression sample_impression(const FingerModel& model,
                                    const ImpressionParams& prm) {
  prm.validate();
  if (model.minutiae.empty())
    throw std::invalid_argument("finger model has no minutiae");
  Rng rng(derive_seed(prm.seed, mix64(model.finger_id) ^ 0x5afe5eedULL));

  Impression imp;
  imp.tpl.channels = model.channels;
  imp.tpl.source_tag = "synthetic";
  for (std::size_t i = 0; i < model.minutiae.size(); ++i) {
    if (rng.next_bernoulli(prm.dropout)) continue;
    FloatRecord r;
    r.minutia = detail::storage_exact(
        rigid_transform(model.minutiae[i], prm.rotation, prm.dx, prm.dy));
    r.descriptor = detail::noisy_descriptor(rng, model.descriptors[i], prm.noise_sigma);
    r.mask = detail::eroded_mask(rng, prm.mask_erosion);
    imp.correspondences.emplace_back(static_cast<int>(imp.tpl.records.size()),
                                     static_cast<int>(i));
    imp.tpl.records.push_back(std::move(r));
  }
  if (imp.tpl.records.empty())
    throw std::runtime_error("every minutia dropped out of the impression");

  for (std::size_t i = 0; i < model.minutiae.size(); ++i) {
    if (!rng.next_bernoulli(prm.spurious)) continue;
    FloatRecord r;
    const Minutia canvas_pos(rng.next_uniform(0.0, synth_canvas),
                             rng.next_uniform(0.0, synth_canvas),
                             rng.next_uniform(0.0, two_pi));
    r.minutia = detail::storage_exact(
        rigid_transform(canvas_pos, prm.rotation, prm.dx, prm.dy));
    r.descriptor = detail::random_descriptor(rng, model.channels);
    r.mask = detail::eroded_mask(rng, prm.mask_erosion);
    imp.tpl.records.push_back(std::move(r));
  }
  return imp;
}

/// Recipe for a whole benchmark/evaluation set: every impression of every
/// finger, with per-impression random rigid poses.
struct DatasetParams {
  int fingers = 10;
  int impressions = 2;
  std::uint64_t seed = 0;
  int min_minutiae = 25;
  int max_minutiae = 45;
  int channels = default_channels;
  double noise_sigma = 0.5;
  double mask_erosion = 0.2;
  double dropout = 0.2;
  double spurious = 0.1;
  double max_translation = 40.0;  // px, poses draw from [-max, max]^2

  void validate() const {
    if (fingers < 1 || impressions < 1)
      throw std::invalid_argument("need at least one finger and one impression");
    if (min_minutiae < 1 || max_minutiae < min_minutiae)
      throw std::invalid_argument("need 1 <= min_minutiae <= max_minutiae");
    if (!(max_translation >= 0.0))
      throw std::invalid_argument("max translation must be >= 0");
  }
};

struct Dataset {
  std::vector<std::string> ids;  // "f00007_1" style, finger before impression
  std::vector<FloatTemplate> templates;
  std::vector<std::vector<std::pair<int, int>>> correspondences;
};

inline std::string dataset_id(int finger, int impression) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "f%05d_%d", finger, impression);
  return buf;
}

/// Generates the full set deterministically; entry order is finger-major.
/// Each finger's minutia count is drawn uniformly from
/// [min_minutiae, max_minutiae] and each impression gets an independent
/// uniform rotation and translation on top of the configured degradations.
inline Dataset synth_dataset(const DatasetParams& prm) {
  prm.validate();
  ImpressionParams base;
  base.noise_sigma = prm.noise_sigma;
  base.mask_erosion = prm.mask_erosion;
  base.dropout = prm.dropout;
  base.spurious = prm.spurious;
  base.validate();

  Dataset out;
  out.ids.reserve(static_cast<std::size_t>(prm.fingers) * prm.impressions);
  for (int f = 0; f < prm.fingers; ++f) {
    Rng finger_rng = substream(prm.seed, 0xd5ULL + static_cast<std::uint64_t>(f));
    const int n_minutiae =
        prm.min_minutiae +
        static_cast<int>(finger_rng.next_below(
            static_cast<std::uint64_t>(prm.max_minutiae - prm.min_minutiae + 1)));
    const FingerModel model = generate_finger(static_cast<std::uint64_t>(f),
                                              n_minutiae, prm.seed, prm.channels);
    for (int i = 0; i < prm.impressions; ++i) {
      ImpressionParams ip = base;
      ip.seed = derive_seed(prm.seed, static_cast<std::uint64_t>(f) * 1000003ULL +
                                          static_cast<std::uint64_t>(i));
      Rng pose_rng = substream(ip.seed, 0xb0ULL);
      ip.rotation = pose_rng.next_uniform(0.0, two_pi);
      ip.dx = pose_rng.next_uniform(-prm.max_translation, prm.max_translation);
      ip.dy = pose_rng.next_uniform(-prm.max_translation, prm.max_translation);
      Impression imp = sample_impression(model, ip);
      imp.tpl.source_tag = dataset_id(f, i);
      out.ids.push_back(dataset_id(f, i));
      out.templates.push_back(std::move(imp.tpl));
      out.correspondences.push_back(std::move(imp.correspondences));
    }
  }
  return out;
}

}  // namespace dmd
