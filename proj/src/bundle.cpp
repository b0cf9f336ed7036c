#include "mlca/bundle.hpp"

#include <bit>

#include "mlca/errors.hpp"

namespace mlca {

Bundle::Bundle(std::size_t num_items, std::uint64_t mask) : mask_(mask), num_items_(num_items) {
  if (num_items > kMaxItems) {
    throw DimensionError("bundle width " + std::to_string(num_items) + " exceeds " +
                         std::to_string(kMaxItems) + " items");
  }
  if ((mask & ~full_mask(num_items)) != 0) {
    throw DimensionError("bundle mask has bits beyond item count");
  }
}

Bundle Bundle::from_items(std::size_t num_items, const std::vector<std::size_t>& items) {
  std::uint64_t mask = 0;
  for (std::size_t j : items) {
    if (j >= num_items) throw DimensionError("item index out of range");
    mask |= std::uint64_t{1} << j;
  }
  return Bundle(num_items, mask);
}

Bundle Bundle::from_string(std::string_view bits) {
  std::uint64_t mask = 0;
  for (std::size_t j = 0; j < bits.size(); ++j) {
    if (bits[j] == '1') {
      mask |= std::uint64_t{1} << j;
    } else if (bits[j] != '0') {
      throw DimensionError("bundle string must contain only '0' and '1'");
    }
  }
  return Bundle(bits.size(), mask);
}

Bundle Bundle::full(std::size_t num_items) { return Bundle(num_items, full_mask(num_items)); }

std::size_t Bundle::count() const { return static_cast<std::size_t>(std::popcount(mask_)); }

Bundle Bundle::with(std::size_t item) const {
  return Bundle(num_items_, mask_ | (std::uint64_t{1} << item));
}

Bundle Bundle::without(std::size_t item) const {
  return Bundle(num_items_, mask_ & ~(std::uint64_t{1} << item));
}

std::vector<std::size_t> Bundle::items() const {
  std::vector<std::size_t> out;
  for (std::uint64_t rest = mask_; rest != 0; rest &= rest - 1) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(rest)));
  }
  return out;
}

std::string Bundle::to_string() const {
  std::string s(num_items_, '0');
  for (std::size_t j = 0; j < num_items_; ++j) {
    if (contains(j)) s[j] = '1';
  }
  return s;
}

std::size_t Bundle::overlap(const Bundle& other) const {
  return static_cast<std::size_t>(std::popcount(mask_ & other.mask_));
}

std::size_t Bundle::distance(const Bundle& other) const {
  return static_cast<std::size_t>(std::popcount(mask_ ^ other.mask_));
}

bool lex_less(const Bundle& a, const Bundle& b) { return lex_less_mask(a.mask(), b.mask()); }

void check_width(const Bundle& b, std::size_t num_items) {
  if (b.num_items() != num_items) {
    throw DimensionError("bundle has " + std::to_string(b.num_items()) + " items, expected " +
                         std::to_string(num_items));
  }
}

}  // namespace mlca
