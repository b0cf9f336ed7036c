#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace mlca {

/// Maximum number of items an instance may have; bundles are stored in one
/// machine word.
inline constexpr std::size_t kMaxItems = 64;

/// Item indicator vector over the m items of an instance.
///
/// Bit j of the mask is item j. The textual form lists item 0 leftmost, so
/// "100" is the bundle {0} when m = 3. Ordering (`lex_less`) is the
/// lexicographic order of that textual form.
class Bundle {
 public:
  Bundle() = default;
  explicit Bundle(std::size_t num_items, std::uint64_t mask = 0);

  static Bundle from_items(std::size_t num_items, const std::vector<std::size_t>& items);
  /// Parses "0101..." (item 0 leftmost). Throws DimensionError on bad input.
  static Bundle from_string(std::string_view bits);
  static Bundle full(std::size_t num_items);

  std::size_t num_items() const { return num_items_; }
  std::uint64_t mask() const { return mask_; }
  bool contains(std::size_t item) const { return (mask_ >> item) & 1U; }
  bool empty() const { return mask_ == 0; }
  std::size_t count() const;

  Bundle with(std::size_t item) const;
  Bundle without(std::size_t item) const;
  std::vector<std::size_t> items() const;
  std::string to_string() const;

  /// |this ∩ other|
  std::size_t overlap(const Bundle& other) const;
  /// Hamming distance, i.e. squared Euclidean distance of the 0/1 vectors.
  std::size_t distance(const Bundle& other) const;
  bool disjoint(const Bundle& other) const { return (mask_ & other.mask_) == 0; }

  friend bool operator==(const Bundle& a, const Bundle& b) {
    return a.num_items_ == b.num_items_ && a.mask_ == b.mask_;
  }

 private:
  std::uint64_t mask_ = 0;
  std::size_t num_items_ = 0;
};

/// Lexicographic order of the bit strings, item 0 most significant.
bool lex_less(const Bundle& a, const Bundle& b);

/// Same order on raw masks of equal width.
inline bool lex_less_mask(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t diff = a ^ b;
  if (diff == 0) return false;
  const int first = __builtin_ctzll(diff);
  return ((a >> first) & 1U) == 0;
}

/// Throws DimensionError unless `b` has exactly `num_items` items.
void check_width(const Bundle& b, std::size_t num_items);

/// Mask with the low `num_items` bits set.
inline std::uint64_t full_mask(std::size_t num_items) {
  return num_items >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << num_items) - 1);
}

struct BundleHash {
  std::size_t operator()(const Bundle& b) const noexcept {
    return std::hash<std::uint64_t>{}(b.mask() * 0x9E3779B97F4A7C15ULL ^ b.num_items());
  }
};

}  // namespace mlca
