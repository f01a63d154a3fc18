#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>

#include "template.hpp"

namespace dmd {

/// On-disk template container (.dmt). Little-endian throughout.
///
///   offset  size  field
///        0     4  magic "DMDT"
///        4     2  format version (currently 1)
///        6     1  flavor: 0 = Float32, 1 = PackedBinary
///        7     1  descriptor channels
///        8     1  grid side (currently always 8)
///        9     1  reserved, written as 0
///       10     4  record count
///       14     2  source tag length L
///       16     L  source tag bytes
///
/// Each record is x, y, theta as f32 followed by the descriptor payload
/// (channel-major, rows before columns; f32 per cell or one packed byte per
/// row) and the mask payload in the same layout.
inline constexpr char format_magic[4] = {'D', 'M', 'D', 'T'};
inline constexpr std::uint16_t format_version = 1;

class FormatError : public std::runtime_error {
 public:
  enum class Kind {
    BadMagic,
    UnsupportedVersion,
    Truncated,
    BadGrid,
    Corrupt,
    WriteFailure,
  };

  FormatError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

namespace detail {

inline void put_bytes(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void put_u16(std::ostream& os, std::uint16_t v) {
  const std::uint8_t b[2] = {static_cast<std::uint8_t>(v & 0xffu),
                             static_cast<std::uint8_t>(v >> 8)};
  put_bytes(os, b, 2);
}

inline void put_u32(std::ostream& os, std::uint32_t v) {
  const std::uint8_t b[4] = {static_cast<std::uint8_t>(v & 0xffu),
                             static_cast<std::uint8_t>((v >> 8) & 0xffu),
                             static_cast<std::uint8_t>((v >> 16) & 0xffu),
                             static_cast<std::uint8_t>(v >> 24)};
  put_bytes(os, b, 4);
}

inline void put_f32(std::ostream& os, float v) {
  put_u32(os, std::bit_cast<std::uint32_t>(v));
}

inline void get_bytes(std::istream& is, void* p, std::size_t n) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n)
    throw FormatError(FormatError::Kind::Truncated,
                      "template stream ends mid-field");
}

inline std::uint8_t get_u8(std::istream& is) {
  std::uint8_t b;
  get_bytes(is, &b, 1);
  return b;
}

inline std::uint16_t get_u16(std::istream& is) {
  std::uint8_t b[2];
  get_bytes(is, b, 2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

inline std::uint32_t get_u32(std::istream& is) {
  std::uint8_t b[4];
  get_bytes(is, b, 4);
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

inline float get_f32(std::istream& is) {
  return std::bit_cast<float>(get_u32(is));
}

/// f32 image of an in-memory angle, guarded so that rounding up can never
/// produce a stored value of 2*pi or more.
inline float theta_to_f32(double theta) {
  float f = static_cast<float>(wrap_angle(theta));
  if (static_cast<double>(f) >= two_pi) f = 0.0f;
  return f;
}

inline std::size_t record_payload_bytes(Flavor f, int channels) {
  if (f == Flavor::Float32)
    return 3 * 4 + static_cast<std::size_t>(channels) * grid_cells * 4 +
           grid_cells * 4;
  return 3 * 4 + static_cast<std::size_t>(channels) * grid_size + grid_size;
}

}  // namespace detail

/// Serialized size of a template in bytes, without writing it.
inline std::size_t serialized_size(const Template& t) {
  return 16 + source_tag_of(t).size() +
         record_count(t) *
             detail::record_payload_bytes(flavor_of(t), channels_of(t));
}

/// Writes a template to a stream; returns the number of bytes written.
/// Throws FormatError(WriteFailure) if the stream rejects any byte, and
/// std::invalid_argument for templates that cannot be represented.
inline std::size_t write_template(const Template& t, std::ostream& os) {
  const std::string& tag = source_tag_of(t);
  if (tag.size() > 0xffff)
    throw std::invalid_argument("source tag longer than 65535 bytes");
  const int ch = channels_of(t);
  if (ch < 1 || ch > 255)
    throw std::invalid_argument("channel count must fit in one byte");
  if (record_count(t) > 0xffffffffu)
    throw std::invalid_argument("record count exceeds format limit");
  std::visit([](const auto& tt) { tt.validate(); }, t);

  detail::put_bytes(os, format_magic, 4);
  detail::put_u16(os, format_version);
  const std::uint8_t flavor_byte = static_cast<std::uint8_t>(flavor_of(t));
  detail::put_bytes(os, &flavor_byte, 1);
  const std::uint8_t ch_byte = static_cast<std::uint8_t>(ch);
  detail::put_bytes(os, &ch_byte, 1);
  const std::uint8_t grid_byte = grid_size;
  detail::put_bytes(os, &grid_byte, 1);
  const std::uint8_t reserved = 0;
  detail::put_bytes(os, &reserved, 1);
  detail::put_u32(os, static_cast<std::uint32_t>(record_count(t)));
  detail::put_u16(os, static_cast<std::uint16_t>(tag.size()));
  detail::put_bytes(os, tag.data(), tag.size());

  if (std::holds_alternative<FloatTemplate>(t)) {
    for (const FloatRecord& r : std::get<FloatTemplate>(t).records) {
      detail::put_f32(os, static_cast<float>(r.minutia.x));
      detail::put_f32(os, static_cast<float>(r.minutia.y));
      detail::put_f32(os, detail::theta_to_f32(r.minutia.theta));
      for (float v : r.descriptor.values) detail::put_f32(os, v);
      for (float v : r.mask.values) detail::put_f32(os, v);
    }
  } else {
    for (const BinaryRecord& r : std::get<BinaryTemplate>(t).records) {
      detail::put_f32(os, static_cast<float>(r.minutia.x));
      detail::put_f32(os, static_cast<float>(r.minutia.y));
      detail::put_f32(os, detail::theta_to_f32(r.minutia.theta));
      detail::put_bytes(os, r.descriptor.bytes.data(), r.descriptor.bytes.size());
      detail::put_bytes(os, r.mask.bytes.data(), r.mask.bytes.size());
    }
  }
  if (!os)
    throw FormatError(FormatError::Kind::WriteFailure,
                      "could not write template stream");
  return serialized_size(t);
}

/// Reads one template from a stream, validating structure and field ranges.
inline Template read_template(std::istream& is) {
  char magic[4];
  detail::get_bytes(is, magic, 4);
  if (std::memcmp(magic, format_magic, 4) != 0)
    throw FormatError(FormatError::Kind::BadMagic,
                      "not a template stream (bad magic)");
  const std::uint16_t version = detail::get_u16(is);
  if (version != format_version)
    throw FormatError(FormatError::Kind::UnsupportedVersion,
                      "unsupported template format version " +
                          std::to_string(version));
  const std::uint8_t flavor_byte = detail::get_u8(is);
  if (flavor_byte > 1)
    throw FormatError(FormatError::Kind::Corrupt,
                      "unknown flavor byte " + std::to_string(flavor_byte));
  const Flavor flavor = static_cast<Flavor>(flavor_byte);
  const int channels = detail::get_u8(is);
  if (channels < 1)
    throw FormatError(FormatError::Kind::Corrupt, "zero descriptor channels");
  const std::uint8_t grid = detail::get_u8(is);
  if (grid != grid_size)
    throw FormatError(FormatError::Kind::BadGrid,
                      "unsupported grid side " + std::to_string(grid));
  detail::get_u8(is);  // reserved
  const std::uint32_t n_records = detail::get_u32(is);
  const std::uint16_t tag_len = detail::get_u16(is);
  std::string tag(tag_len, '\0');
  if (tag_len > 0) detail::get_bytes(is, tag.data(), tag_len);

  const auto read_minutia = [&is]() {
    const float x = detail::get_f32(is);
    const float y = detail::get_f32(is);
    const float theta = detail::get_f32(is);
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(theta))
      throw FormatError(FormatError::Kind::Corrupt,
                        "non-finite minutia coordinates");
    return Minutia(x, y, theta);
  };

  if (flavor == Flavor::Float32) {
    FloatTemplate t;
    t.channels = channels;
    t.source_tag = std::move(tag);
    t.records.reserve(n_records);
    for (std::uint32_t i = 0; i < n_records; ++i) {
      FloatRecord r;
      r.minutia = read_minutia();
      r.descriptor = DescriptorGrid(channels);
      for (float& v : r.descriptor.values) {
        v = detail::get_f32(is);
        if (!std::isfinite(v))
          throw FormatError(FormatError::Kind::Corrupt,
                            "non-finite descriptor value");
      }
      for (float& v : r.mask.values) {
        v = detail::get_f32(is);
        if (!(v >= 0.0f && v <= 1.0f))
          throw FormatError(FormatError::Kind::Corrupt,
                            "mask weight outside [0, 1]");
      }
      t.records.push_back(std::move(r));
    }
    return Template(std::move(t));
  }

  BinaryTemplate t;
  t.channels = channels;
  t.source_tag = std::move(tag);
  t.records.reserve(n_records);
  for (std::uint32_t i = 0; i < n_records; ++i) {
    BinaryRecord r;
    r.minutia = read_minutia();
    r.descriptor = BitDescriptor(channels);
    detail::get_bytes(is, r.descriptor.bytes.data(), r.descriptor.bytes.size());
    detail::get_bytes(is, r.mask.bytes.data(), r.mask.bytes.size());
    t.records.push_back(std::move(r));
  }
  return Template(std::move(t));
}

inline std::size_t write_template_file(const Template& t,
                                       const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  const std::size_t n = write_template(t, os);
  os.flush();
  if (!os)
    throw FormatError(FormatError::Kind::WriteFailure,
                      "could not write '" + path + "'");
  return n;
}

inline Template read_template_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "' for reading");
  return read_template(is);
}

/// Human-readable one-line-per-record summary, used by the CLI inspector.
inline std::string dump_template(const Template& t) {
  std::ostringstream os;
  os << "template: flavor=" << flavor_name(flavor_of(t))
     << " channels=" << channels_of(t) << " grid=" << grid_size
     << " records=" << record_count(t) << " bytes=" << serialized_size(t)
     << " source_tag=\"" << source_tag_of(t) << "\"\n";
  os << std::fixed;
  const auto minutia_line = [&os](std::size_t i, const Minutia& m) {
    os << "[" << std::setw(3) << i << "] x=" << std::setprecision(2) << m.x
       << " y=" << m.y << " theta_deg=" << std::setprecision(1)
       << m.theta * 180.0 / std::numbers::pi;
  };
  if (std::holds_alternative<FloatTemplate>(t)) {
    const FloatTemplate& ft = std::get<FloatTemplate>(t);
    for (std::size_t i = 0; i < ft.records.size(); ++i) {
      const FloatRecord& r = ft.records[i];
      minutia_line(i, r.minutia);
      double mean = 0.0;
      float lo = r.descriptor.values.front(), hi = lo;
      for (float v : r.descriptor.values) {
        mean += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      mean /= static_cast<double>(r.descriptor.values.size());
      double fg = 0.0;
      for (float v : r.mask.values) fg += v;
      fg /= static_cast<double>(grid_cells);
      os << " desc_min=" << std::setprecision(4) << lo << " desc_max=" << hi
         << " desc_mean=" << std::setprecision(6) << mean
         << " mask_fg=" << std::setprecision(4) << fg << "\n";
    }
  } else {
    const BinaryTemplate& bt = std::get<BinaryTemplate>(t);
    for (std::size_t i = 0; i < bt.records.size(); ++i) {
      const BinaryRecord& r = bt.records[i];
      minutia_line(i, r.minutia);
      int pop = 0;
      for (int c = 0; c < r.descriptor.channels; ++c)
        pop += std::popcount(r.descriptor.word(c));
      os << " desc_popcount=" << pop
         << " mask_cells=" << std::popcount(r.mask.word()) << "\n";
    }
  }
  return os.str();
}

}  // namespace dmd
