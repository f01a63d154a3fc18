#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <variant>
#include <vector>

#include "template.hpp"

namespace dmd {

/// Local similarities for one (query record, gallery record) grid.
struct SimilarityMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;  // row-major, rows * cols entries

  SimilarityMatrix() = default;
  SimilarityMatrix(int r, int c)
      : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, 0.0) {}

  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * cols + j]; }
  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * cols + j]; }
};

/// Masked operands below this Frobenius norm count as empty; the similarity
/// is then defined to be 0 instead of dividing by ~0.
inline constexpr double min_operand_norm = 1e-12;

/// Cosine similarity between two real descriptors after swapping masks
/// across them: the query descriptor is weighted cell-wise by the gallery
/// mask and vice versa, each mask broadcasting over all channels. The result
/// is clamped to [-1, 1] to absorb last-ulp rounding.
inline double masked_cosine_similarity(const DescriptorGrid& fq,
                                       const ForegroundMask& hq,
                                       const DescriptorGrid& fg,
                                       const ForegroundMask& hg) {
  if (fq.channels != fg.channels)
    throw std::invalid_argument("descriptor channel counts differ");
  double dot = 0.0, nq = 0.0, ng = 0.0;
  for (int cell = 0; cell < grid_cells; ++cell) {
    const double wq = hg.values[cell];  // weight applied to the query side
    const double wg = hq.values[cell];  // weight applied to the gallery side
    for (int c = 0; c < fq.channels; ++c) {
      const std::size_t k = static_cast<std::size_t>(c) * grid_cells + cell;
      const double a = fq.values[k] * wq;
      const double b = fg.values[k] * wg;
      dot += a * b;
      nq += a * a;
      ng += b * b;
    }
  }
  const double norm_q = std::sqrt(nq);
  const double norm_g = std::sqrt(ng);
  if (norm_q < min_operand_norm || norm_g < min_operand_norm) return 0.0;
  return std::clamp(dot / (norm_q * norm_g), -1.0, 1.0);
}

/// Similarity between two packed binary descriptors: one minus the fraction
/// of disagreeing bits inside the cell overlap of the two masks, the overlap
/// broadcasting over all channels. Empty overlap yields 0.
inline double masked_hamming_similarity(const BitDescriptor& bq,
                                        const BitMask& mq,
                                        const BitDescriptor& bg,
                                        const BitMask& mg) {
  if (bq.channels != bg.channels)
    throw std::invalid_argument("descriptor channel counts differ");
  const std::uint64_t overlap = mq.word() & mg.word();
  const int cells = std::popcount(overlap);
  if (cells == 0) return 0.0;
  std::uint64_t mismatched = 0;
  for (int c = 0; c < bq.channels; ++c)
    mismatched += std::popcount((bq.word(c) ^ bg.word(c)) & overlap);
  return 1.0 - static_cast<double>(mismatched) /
                   (static_cast<double>(bq.channels) * cells);
}

inline double record_similarity(const FloatRecord& q, const FloatRecord& g) {
  return masked_cosine_similarity(q.descriptor, q.mask, g.descriptor, g.mask);
}

inline double record_similarity(const BinaryRecord& q, const BinaryRecord& g) {
  return masked_hamming_similarity(q.descriptor, q.mask, g.descriptor, g.mask);
}

/// All-pairs local similarities between two templates of one flavor.
template <class RecordT>
SimilarityMatrix similarity_matrix(const BasicTemplate<RecordT>& q,
                                   const BasicTemplate<RecordT>& g) {
  if (q.records.empty() || g.records.empty())
    throw std::invalid_argument("cannot compare an empty template");
  if (q.channels != g.channels)
    throw std::invalid_argument("template channel counts differ");
  SimilarityMatrix s(static_cast<int>(q.records.size()),
                     static_cast<int>(g.records.size()));
  for (int i = 0; i < s.rows; ++i)
    for (int j = 0; j < s.cols; ++j)
      s.at(i, j) = record_similarity(q.records[i], g.records[j]);
  return s;
}

inline SimilarityMatrix similarity_matrix(const Template& q, const Template& g) {
  if (flavor_of(q) != flavor_of(g))
    throw std::invalid_argument("cannot compare templates of different flavors");
  if (std::holds_alternative<FloatTemplate>(q))
    return similarity_matrix(std::get<FloatTemplate>(q), std::get<FloatTemplate>(g));
  return similarity_matrix(std::get<BinaryTemplate>(q), std::get<BinaryTemplate>(g));
}

}  // namespace dmd
