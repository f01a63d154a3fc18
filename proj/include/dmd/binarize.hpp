#pragma once

#include <stdexcept>
#include <variant>

#include "template.hpp"

namespace dmd {

/// Thresholds that turn a real record into a packed binary one. Descriptor
/// responses are signed, so any strictly positive value becomes a 1 bit;
/// soft mask weights are kept only where the cell is more foreground than
/// background.
inline constexpr float descriptor_bit_threshold = 0.0f;
inline constexpr float mask_bit_threshold = 0.5f;

inline BitDescriptor binarize_descriptor(const DescriptorGrid& d) {
  BitDescriptor out(d.channels);
  for (int c = 0; c < d.channels; ++c)
    for (int row = 0; row < grid_size; ++row)
      for (int col = 0; col < grid_size; ++col)
        out.set_bit(c, row, col, d.at(c, row, col) > descriptor_bit_threshold);
  return out;
}

inline BitMask binarize_mask(const ForegroundMask& m) {
  BitMask out;
  for (int row = 0; row < grid_size; ++row)
    for (int col = 0; col < grid_size; ++col)
      out.set_bit(row, col, m.at(row, col) > mask_bit_threshold);
  return out;
}

inline BinaryRecord binarize_record(const FloatRecord& r) {
  return BinaryRecord{r.minutia, binarize_descriptor(r.descriptor),
                      binarize_mask(r.mask)};
}

inline BinaryTemplate binarize_template(const FloatTemplate& t) {
  BinaryTemplate out;
  out.channels = t.channels;
  out.source_tag = t.source_tag;
  out.records.reserve(t.records.size());
  for (const FloatRecord& r : t.records) out.records.push_back(binarize_record(r));
  return out;
}

inline Template binarize_template(const Template& t) {
  if (!std::holds_alternative<FloatTemplate>(t))
    throw std::invalid_argument("template is already binarized");
  return Template(binarize_template(std::get<FloatTemplate>(t)));
}

}  // namespace dmd
