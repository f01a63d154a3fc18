#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "core.hpp"

namespace dmd {

enum class Flavor : std::uint8_t { Float32 = 0, PackedBinary = 1 };

inline const char* flavor_name(Flavor f) {
  return f == Flavor::Float32 ? "float32" : "packed_binary";
}

/// Real-valued descriptor: channels x 8 x 8, stored channel-major with rows
/// before columns inside a channel.
struct DescriptorGrid {
  int channels = default_channels;
  std::vector<float> values;  // channels * grid_cells entries

  DescriptorGrid() : values(static_cast<std::size_t>(default_channels) * grid_cells, 0.0f) {}
  explicit DescriptorGrid(int ch)
      : channels(ch), values(static_cast<std::size_t>(ch) * grid_cells, 0.0f) {
    if (ch <= 0) throw std::invalid_argument("descriptor channels must be positive");
  }

  std::size_t index(int c, int row, int col) const {
    return static_cast<std::size_t>(c) * grid_cells + row * grid_size + col;
  }
  float at(int c, int row, int col) const { return values[index(c, row, col)]; }
  float& at(int c, int row, int col) { return values[index(c, row, col)]; }

  bool operator==(const DescriptorGrid&) const = default;
};

/// Per-minutia foreground weights over the 8 x 8 cell grid, one value per
/// cell in [0, 1], shared across all descriptor channels.
struct ForegroundMask {
  std::array<float, grid_cells> values{};

  float at(int row, int col) const { return values[row * grid_size + col]; }
  float& at(int row, int col) { return values[row * grid_size + col]; }

  void fill(float v) { values.fill(v); }

  bool operator==(const ForegroundMask&) const = default;
};

inline ForegroundMask full_mask() {
  ForegroundMask m;
  m.fill(1.0f);
  return m;
}

/// Packed binary descriptor: one bit per (channel, row, col). Each channel
/// occupies 8 consecutive bytes, one byte per row, most significant bit =
/// column 0. A channel's 8 bytes therefore read as one little-endian u64
/// with the same cell layout as a packed mask, which lets the Hamming
/// kernel mask whole channels with a single AND.
struct BitDescriptor {
  int channels = default_channels;
  std::vector<std::uint8_t> bytes;  // channels * grid_size entries

  BitDescriptor() : bytes(static_cast<std::size_t>(default_channels) * grid_size, 0) {}
  explicit BitDescriptor(int ch)
      : channels(ch), bytes(static_cast<std::size_t>(ch) * grid_size, 0) {
    if (ch <= 0) throw std::invalid_argument("descriptor channels must be positive");
  }

  bool bit(int c, int row, int col) const {
    return (bytes[static_cast<std::size_t>(c) * grid_size + row] >> (7 - col)) & 1u;
  }
  void set_bit(int c, int row, int col, bool v) {
    std::uint8_t& b = bytes[static_cast<std::size_t>(c) * grid_size + row];
    const std::uint8_t m = static_cast<std::uint8_t>(1u << (7 - col));
    b = v ? (b | m) : (b & static_cast<std::uint8_t>(~m));
  }

  /// One channel's 64 cells as a word (byte order irrelevant to popcounts).
  std::uint64_t word(int c) const {
    std::uint64_t w;
    std::memcpy(&w, bytes.data() + static_cast<std::size_t>(c) * grid_size, 8);
    return w;
  }

  bool operator==(const BitDescriptor&) const = default;
};

/// Packed binary foreground mask: one bit per cell, same byte/bit layout as
/// one BitDescriptor channel.
struct BitMask {
  std::array<std::uint8_t, grid_size> bytes{};

  bool bit(int row, int col) const { return (bytes[row] >> (7 - col)) & 1u; }
  void set_bit(int row, int col, bool v) {
    const std::uint8_t m = static_cast<std::uint8_t>(1u << (7 - col));
    bytes[row] = v ? (bytes[row] | m) : (bytes[row] & static_cast<std::uint8_t>(~m));
  }

  std::uint64_t word() const {
    std::uint64_t w;
    std::memcpy(&w, bytes.data(), 8);
    return w;
  }

  bool operator==(const BitMask&) const = default;
};

inline BitMask full_bit_mask() {
  BitMask m;
  m.bytes.fill(0xffu);
  return m;
}

struct FloatRecord {
  Minutia minutia;
  DescriptorGrid descriptor;
  ForegroundMask mask;

  bool operator==(const FloatRecord& o) const {
    return minutia.x == o.minutia.x && minutia.y == o.minutia.y &&
           minutia.theta == o.minutia.theta && descriptor == o.descriptor &&
           mask == o.mask;
  }
};

struct BinaryRecord {
  Minutia minutia;
  BitDescriptor descriptor;
  BitMask mask;

  bool operator==(const BinaryRecord& o) const {
    return minutia.x == o.minutia.x && minutia.y == o.minutia.y &&
           minutia.theta == o.minutia.theta && descriptor == o.descriptor &&
           mask == o.mask;
  }
};

/// An enrolled fingerprint: a free-form source tag plus one record (minutia,
/// descriptor, mask) per detected minutia. All records share one channel
/// count.
template <class RecordT>
struct BasicTemplate {
  int channels = default_channels;
  std::string source_tag;
  std::vector<RecordT> records;

  /// Throws if any record disagrees with the template channel count.
  void validate() const {
    if (channels <= 0)
      throw std::invalid_argument("template channel count must be positive");
    for (const RecordT& r : records)
      if (r.descriptor.channels != channels)
        throw std::invalid_argument("record channel count differs from template");
  }

  bool operator==(const BasicTemplate& o) const {
    return channels == o.channels && source_tag == o.source_tag &&
           records == o.records;
  }
};

using FloatTemplate = BasicTemplate<FloatRecord>;
using BinaryTemplate = BasicTemplate<BinaryRecord>;

/// Runtime-flavored template as read from storage.
using Template = std::variant<FloatTemplate, BinaryTemplate>;

inline Flavor flavor_of(const Template& t) {
  return std::holds_alternative<FloatTemplate>(t) ? Flavor::Float32
                                                  : Flavor::PackedBinary;
}

inline int channels_of(const Template& t) {
  return std::visit([](const auto& tt) { return tt.channels; }, t);
}

inline std::size_t record_count(const Template& t) {
  return std::visit([](const auto& tt) { return tt.records.size(); }, t);
}

inline const std::string& source_tag_of(const Template& t) {
  return std::visit([](const auto& tt) -> const std::string& { return tt.source_tag; }, t);
}

template <class RecordT>
std::vector<Minutia> minutiae_of(const BasicTemplate<RecordT>& t) {
  std::vector<Minutia> out;
  out.reserve(t.records.size());
  for (const RecordT& r : t.records) out.push_back(r.minutia);
  return out;
}

inline std::vector<Minutia> minutiae_of(const Template& t) {
  return std::visit([](const auto& tt) { return minutiae_of(tt); }, t);
}

/// Applies one rigid motion to every minutia; descriptors and masks are
/// untouched (they live in the minutia-aligned patch frame and move with it).
template <class RecordT>
BasicTemplate<RecordT> rigid_transform_template(const BasicTemplate<RecordT>& t,
                                                double beta, double tx,
                                                double ty) {
  BasicTemplate<RecordT> out = t;
  for (RecordT& r : out.records) r.minutia = rigid_transform(r.minutia, beta, tx, ty);
  return out;
}

inline Template rigid_transform_template(const Template& t, double beta,
                                         double tx, double ty) {
  return std::visit(
      [&](const auto& tt) { return Template(rigid_transform_template(tt, beta, tx, ty)); },
      t);
}

}  // namespace dmd
