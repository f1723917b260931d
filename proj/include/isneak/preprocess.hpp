#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "isneak/model.hpp"

namespace isneak {

/// Row-major packed boolean matrix.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), words_((cols + 63) / 64), data_(rows * words_, 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t words_per_row() const { return words_; }

  bool get(std::size_t r, std::size_t c) const {
    return (data_[r * words_ + c / 64] >> (c % 64)) & 1U;
  }
  void set(std::size_t r, std::size_t c, bool v = true) {
    auto& w = data_[r * words_ + c / 64];
    const std::uint64_t mask = std::uint64_t{1} << (c % 64);
    w = v ? (w | mask) : (w & ~mask);
  }
  std::span<const std::uint64_t> row(std::size_t r) const {
    return {data_.data() + r * words_, words_};
  }
  std::size_t hamming(std::size_t a, std::size_t b) const {
    std::size_t d = 0;
    const auto* x = data_.data() + a * words_;
    const auto* y = data_.data() + b * words_;
    for (std::size_t i = 0; i < words_; ++i) d += static_cast<std::size_t>(std::popcount(x[i] ^ y[i]));
    return d;
  }
  bool operator==(const BitMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> data_;
};

struct Bin {
  double lo = 0.0;
  double hi = 0.0;  // exclusive, except for the last bin of an attribute
  std::size_t n = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  double sd() const;  // population standard deviation
};

inline constexpr std::size_t kDefaultBins = 16;

/// `bins` equal-width bins over [min, max]; a single bin when min == max.
std::vector<Bin> equal_width_bins(std::span<const double> values, std::size_t bins = kDefaultBins);

/// Merges adjacent bins i, j into k when sd_k <= (n_i/n_k) sd_i + (n_j/n_k) sd_j,
/// scanning left to right and restarting after each merge until a pass makes
/// no change. Empty bins always merge into a neighbour.
std::vector<Bin> merge_bins(std::vector<Bin> bins);

bool merge_predicate(const Bin& i, const Bin& j);

/// One (attribute, value) pair. `value` indexes the attribute's value domain:
/// 0/1 for booleans, bin index for numerics, symbol index for categoricals.
struct AttrValue {
  std::size_t attribute = 0;
  std::size_t value = 0;

  bool operator==(const AttrValue&) const = default;
  auto operator<=>(const AttrValue&) const = default;
};

struct AttributeEncoding {
  std::string name;
  AttributeKind kind = AttributeKind::boolean;
  std::vector<Bin> bins;              // numeric
  std::vector<std::string> symbols;   // categorical
  std::size_t first_column = 0;
  std::size_t column_count = 1;

  std::size_t domain_size() const;    // number of distinct values
  std::string label(std::size_t value) const;
};

struct EncodingScheme {
  std::vector<AttributeEncoding> attributes;
  std::vector<std::size_t> column_attribute;  // column -> attribute id

  std::size_t columns() const { return column_attribute.size(); }

  /// Value index of a raw attribute value. Throws ErrorCode::out_of_range.
  std::size_t value_index(std::size_t attribute, double raw) const;
  std::string label(AttrValue av) const { return attributes[av.attribute].label(av.value); }
};

struct EncodedPool {
  EncodingScheme scheme;
  BitMatrix bits;
  std::vector<std::vector<std::uint32_t>> value_of;  // [row][attribute] value index

  std::size_t size() const { return bits.rows(); }
  bool has(std::size_t row, AttrValue av) const { return value_of[row][av.attribute] == av.value; }
};

/// Builds the scheme from the pool's own attribute values.
EncodingScheme build_scheme(const CandidatePool& pool, std::size_t bins = kDefaultBins);

/// Encodes every candidate. Boolean attributes take one column (true -> 1);
/// numeric attributes one column per merged bin; categoricals one per symbol.
EncodedPool encode_pool(const CandidatePool& pool, const EncodingScheme& scheme);
EncodedPool encode_pool(const CandidatePool& pool, std::size_t bins = kDefaultBins);

std::string scheme_json(const EncodingScheme& scheme);

}  // namespace isneak
