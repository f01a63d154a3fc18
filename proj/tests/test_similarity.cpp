#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "support.hpp"

using namespace dmd;
using Catch::Approx;

namespace {

// Independent scalar re-implementation used as the oracle: build both masked
// operands explicitly, then take their cosine.
double cosine_oracle(const DescriptorGrid& fq, const ForegroundMask& hq,
                     const DescriptorGrid& fg, const ForegroundMask& hg) {
  std::vector<double> a, b;
  for (int c = 0; c < fq.channels; ++c)
    for (int row = 0; row < grid_size; ++row)
      for (int col = 0; col < grid_size; ++col) {
        a.push_back(static_cast<double>(fq.at(c, row, col)) * hg.at(row, col));
        b.push_back(static_cast<double>(fg.at(c, row, col)) * hq.at(row, col));
      }
  double dot = 0, na = 0, nb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (std::sqrt(na) < 1e-12 || std::sqrt(nb) < 1e-12) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Bit-by-bit oracle for the packed path.
double hamming_oracle(const BitDescriptor& bq, const BitMask& mq,
                      const BitDescriptor& bg, const BitMask& mg) {
  int overlap = 0, diff = 0;
  for (int row = 0; row < grid_size; ++row)
    for (int col = 0; col < grid_size; ++col) {
      if (!(mq.bit(row, col) && mg.bit(row, col))) continue;
      ++overlap;
      for (int c = 0; c < bq.channels; ++c)
        if (bq.bit(c, row, col) != bg.bit(c, row, col)) ++diff;
    }
  if (overlap == 0) return 0.0;
  return 1.0 - static_cast<double>(diff) /
                   (static_cast<double>(bq.channels) * overlap);
}

}  // namespace

TEST_CASE("cosine similarity pins: self, antipodal, empty operand") {
  Rng rng(101);
  const DescriptorGrid f = testsup::random_descriptor(rng, default_channels);
  const ForegroundMask ones = full_mask();

  const double self = masked_cosine_similarity(f, ones, f, ones);
  CHECK(self == Approx(1.0).margin(1e-9));
  CHECK(self <= 1.0);

  DescriptorGrid neg = f;
  for (float& v : neg.values) v = -v;
  const double anti = masked_cosine_similarity(f, ones, neg, ones);
  CHECK(anti == Approx(-1.0).margin(1e-9));
  CHECK(anti >= -1.0);

  ForegroundMask zero;  // all cells background: the masked operand vanishes
  CHECK(masked_cosine_similarity(f, ones, f, zero) == 0.0);
  CHECK(masked_cosine_similarity(f, zero, f, ones) == 0.0);

  DescriptorGrid tiny(default_channels);  // all-zero descriptor
  CHECK(masked_cosine_similarity(tiny, ones, f, ones) == 0.0);
}

TEST_CASE("cosine similarity matches the scalar oracle") {
  Rng rng(102);
  for (int trial = 0; trial < 300; ++trial) {
    const int ch = 1 + static_cast<int>(rng.next_below(12));
    const DescriptorGrid fq = testsup::random_descriptor(rng, ch);
    const DescriptorGrid fg = testsup::random_descriptor(rng, ch);
    const ForegroundMask hq = testsup::random_soft_mask(rng);
    const ForegroundMask hg = testsup::random_soft_mask(rng);
    const double got = masked_cosine_similarity(fq, hq, fg, hg);
    CHECK(got == Approx(cosine_oracle(fq, hq, fg, hg)).margin(1e-12));
    CHECK(got >= -1.0);
    CHECK(got <= 1.0);
    // Swapping the roles of query and gallery swaps the masked operands but
    // not the score.
    CHECK(masked_cosine_similarity(fg, hg, fq, hq) == Approx(got).margin(1e-12));
  }
}

TEST_CASE("cosine similarity ignores magnitude and out-of-mask content") {
  Rng rng(103);
  for (int trial = 0; trial < 200; ++trial) {
    const DescriptorGrid fq = testsup::random_descriptor(rng, 6);
    const DescriptorGrid fg = testsup::random_descriptor(rng, 6);
    const ForegroundMask hq = testsup::random_hard_mask(rng);
    const ForegroundMask hg = testsup::random_hard_mask(rng);
    const double base = masked_cosine_similarity(fq, hq, fg, hg);

    // Positive rescaling of one side never moves the score.
    DescriptorGrid scaled = fq;
    const float k = static_cast<float>(rng.next_uniform(0.25, 4.0));
    for (float& v : scaled.values) v *= k;
    CHECK(masked_cosine_similarity(scaled, hq, fg, hg) == Approx(base).margin(1e-9));

    // Gallery cells the query mask suppresses cannot influence the score.
    DescriptorGrid poked = fg;
    bool changed = false;
    for (int row = 0; row < grid_size; ++row)
      for (int col = 0; col < grid_size; ++col)
        if (hq.at(row, col) == 0.0f) {
          for (int c = 0; c < poked.channels; ++c)
            poked.at(c, row, col) = static_cast<float>(rng.next_gaussian() * 10.0);
          changed = true;
        }
    if (changed)
      CHECK(masked_cosine_similarity(fq, hq, poked, hg) == base);
  }
}

TEST_CASE("cosine similarity rejects mismatched channel counts") {
  Rng rng(104);
  const DescriptorGrid a = testsup::random_descriptor(rng, 6);
  const DescriptorGrid b = testsup::random_descriptor(rng, 12);
  CHECK_THROWS_AS(masked_cosine_similarity(a, full_mask(), b, full_mask()),
                  std::invalid_argument);
}

TEST_CASE("hamming similarity pins: equal, complement, tiny overlap") {
  Rng rng(105);
  const BitDescriptor b = testsup::random_bit_descriptor(rng, default_channels);
  const BitMask ones = full_bit_mask();
  CHECK(masked_hamming_similarity(b, ones, b, ones) == 1.0);

  BitDescriptor flip = b;
  for (std::uint8_t& byte : flip.bytes) byte = static_cast<std::uint8_t>(~byte);
  CHECK(masked_hamming_similarity(b, ones, flip, ones) == 0.0);

  // One channel, a four-cell overlap, one disagreeing bit inside it.
  BitDescriptor bq(1), bg(1);
  BitMask m;
  m.set_bit(0, 0, true);
  m.set_bit(0, 1, true);
  m.set_bit(1, 0, true);
  m.set_bit(1, 1, true);
  bg.set_bit(0, 1, 1, true);
  CHECK(masked_hamming_similarity(bq, m, bg, m) == 0.75);

  // Disjoint masks leave nothing to compare.
  BitMask left, right;
  for (int row = 0; row < grid_size; ++row) {
    left.set_bit(row, 0, true);
    right.set_bit(row, grid_size - 1, true);
  }
  CHECK(masked_hamming_similarity(b, left, flip, right) == 0.0);
}

TEST_CASE("hamming similarity matches the bit-level oracle") {
  Rng rng(106);
  for (int trial = 0; trial < 500; ++trial) {
    const int ch = 1 + static_cast<int>(rng.next_below(12));
    const BitDescriptor bq = testsup::random_bit_descriptor(rng, ch);
    const BitDescriptor bg = testsup::random_bit_descriptor(rng, ch);
    const BitMask mq = testsup::random_bit_mask(rng);
    const BitMask mg = testsup::random_bit_mask(rng);
    const double got = masked_hamming_similarity(bq, mq, bg, mg);
    CHECK(got == hamming_oracle(bq, mq, bg, mg));
    CHECK(got >= 0.0);
    CHECK(got <= 1.0);
    CHECK(masked_hamming_similarity(bg, mg, bq, mq) == got);
  }
}

TEST_CASE("hamming similarity ignores bits outside the mask overlap") {
  Rng rng(107);
  for (int trial = 0; trial < 200; ++trial) {
    const BitDescriptor bq = testsup::random_bit_descriptor(rng, 12);
    BitDescriptor bg = testsup::random_bit_descriptor(rng, 12);
    const BitMask mq = testsup::random_bit_mask(rng, 0.5);
    const BitMask mg = testsup::random_bit_mask(rng, 0.5);
    const double base = masked_hamming_similarity(bq, mq, bg, mg);
    for (int row = 0; row < grid_size; ++row)
      for (int col = 0; col < grid_size; ++col)
        if (!(mq.bit(row, col) && mg.bit(row, col)))
          for (int c = 0; c < bg.channels; ++c)
            bg.set_bit(c, row, col, rng.next_bernoulli(0.5));
    CHECK(masked_hamming_similarity(bq, mq, bg, mg) == base);
  }
}

TEST_CASE("hamming similarity rejects mismatched channel counts") {
  Rng rng(108);
  const BitDescriptor a = testsup::random_bit_descriptor(rng, 6);
  const BitDescriptor b = testsup::random_bit_descriptor(rng, 12);
  CHECK_THROWS_AS(masked_hamming_similarity(a, full_bit_mask(), b, full_bit_mask()),
                  std::invalid_argument);
}

TEST_CASE("similarity matrix covers all record pairs in both flavors") {
  Rng rng(109);
  FloatTemplate q = testsup::random_float_template(rng, 4, 6);
  FloatTemplate g = testsup::random_float_template(rng, 7, 6);
  const SimilarityMatrix s = similarity_matrix(q, g);
  REQUIRE(s.rows == 4);
  REQUIRE(s.cols == 7);
  for (int i = 0; i < s.rows; ++i)
    for (int j = 0; j < s.cols; ++j)
      CHECK(s.at(i, j) == record_similarity(q.records[i], g.records[j]));

  // Self comparison with all-ones masks puts 1.0 on the diagonal.
  for (FloatRecord& r : q.records) r.mask = full_mask();
  const SimilarityMatrix self = similarity_matrix(q, q);
  for (int i = 0; i < self.rows; ++i) {
    CHECK(self.at(i, i) == Approx(1.0).margin(1e-9));
    for (int j = 0; j < self.cols; ++j) {
      CHECK(self.at(i, j) >= -1.0);
      CHECK(self.at(i, j) <= 1.0);
    }
  }

  const BinaryTemplate bq = testsup::random_binary_template(rng, 3, 12);
  const BinaryTemplate bg = testsup::random_binary_template(rng, 5, 12);
  const SimilarityMatrix bs = similarity_matrix(bq, bg);
  REQUIRE(bs.rows == 3);
  REQUIRE(bs.cols == 5);
  for (int i = 0; i < bs.rows; ++i)
    for (int j = 0; j < bs.cols; ++j)
      CHECK(bs.at(i, j) == record_similarity(bq.records[i], bg.records[j]));
}

TEST_CASE("similarity matrix rejects empty and incompatible templates") {
  Rng rng(110);
  const FloatTemplate q = testsup::random_float_template(rng, 3, 6);
  FloatTemplate empty;
  empty.channels = 6;
  CHECK_THROWS_AS(similarity_matrix(q, empty), std::invalid_argument);
  CHECK_THROWS_AS(similarity_matrix(empty, q), std::invalid_argument);

  const FloatTemplate other = testsup::random_float_template(rng, 3, 12);
  CHECK_THROWS_AS(similarity_matrix(q, other), std::invalid_argument);

  const Template fv(q);
  const Template bv(testsup::random_binary_template(rng, 3, 6));
  CHECK_THROWS_AS(similarity_matrix(fv, bv), std::invalid_argument);
}
