#include "mlca/valuemodels.hpp"

#include <algorithm>
#include <cmath>

#include "mlca/errors.hpp"
#include "mlca/rng.hpp"

namespace mlca {

Bundle GsvmBidder::interest_set() const {
  std::uint64_t mask = 0;
  for (std::size_t j = 0; j < item_values.size(); ++j) {
    if (item_values[j] > 0.0) mask |= std::uint64_t{1} << j;
  }
  return Bundle(item_values.size(), mask);
}

double GsvmBidder::value(const Bundle& x) const {
  check_width(x, item_values.size());
  double sum = 0.0;
  std::size_t size = 0;
  for (std::uint64_t rest = x.mask(); rest != 0; rest &= rest - 1) {
    const double v = item_values[static_cast<std::size_t>(__builtin_ctzll(rest))];
    if (v > 0.0) {
      sum += v;
      ++size;
    }
  }
  if (size == 0) return 0.0;
  return sum * (1.0 + 0.2 * static_cast<double>(size - 1));
}

double TwoWiseBidder::raw_value(const Bundle& x) const {
  check_width(x, weights.size());
  const auto items = x.items();
  double total = 0.0;
  for (std::size_t a = 0; a < items.size(); ++a) {
    const std::size_t j = items[a];
    total += weights[j];
    for (std::size_t b = 0; b < a; ++b) total += pair_weights[j][items[b]];
  }
  return total;
}

double TwoWiseBidder::value(const Bundle& x) const { return std::max(0.0, raw_value(x)); }

TableBidder TableBidder::from_pairs(std::size_t num_items,
                                    const std::vector<std::pair<std::string, double>>& entries) {
  if (num_items > 20) throw CapabilityError("table valuations support at most 20 items");
  TableBidder t;
  t.items = num_items;
  t.values.assign(std::size_t{1} << num_items, 0.0);
  for (const auto& [bits, value] : entries) {
    const Bundle b = Bundle::from_string(bits);
    check_width(b, num_items);
    if (value < 0.0) throw ParameterError("table values must be nonnegative");
    if (!b.empty()) t.values[b.mask()] = value;
  }
  return t;
}

double TableBidder::value(const Bundle& x) const {
  check_width(x, items);
  return values[x.mask()];
}

double value_of(const Valuation& v, const Bundle& x) {
  return std::visit([&](const auto& b) { return b.value(x); }, v);
}

std::size_t num_items_of(const Valuation& v) {
  return std::visit([](const auto& b) { return b.num_items(); }, v);
}

TwoWiseBidder to_two_wise(const GsvmBidder& b) {
  const std::size_t m = b.num_items();
  TwoWiseBidder t;
  t.weights = b.item_values;
  t.pair_weights.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    t.pair_weights[j].assign(j, 0.0);
    for (std::size_t k = 0; k < j; ++k) {
      if (b.item_values[j] > 0.0 && b.item_values[k] > 0.0) {
        t.pair_weights[j][k] = 0.2 * (b.item_values[j] + b.item_values[k]);
      }
    }
  }
  return t;
}

double DomainInstance::value(std::size_t bidder, const Bundle& x) const {
  return value_of(bidders.at(bidder), x);
}

BundleValueFn DomainInstance::value_fn() const {
  return [this](std::size_t bidder, const Bundle& x) { return value(bidder, x); };
}

DomainInstance generate_gsvm(std::uint64_t seed, std::size_t num_items, std::size_t num_bidders) {
  if (num_items < 2 || num_bidders < 2) throw ParameterError("GSVM needs at least 2 items and 2 bidders");
  if (num_items > kMaxItems) throw DimensionError("too many items");
  Rng rng(seed, "gsvm");
  DomainInstance d{"gsvm", seed, num_items, {}};
  const std::size_t arc = (num_items + 2) / 3;
  const std::size_t regional = num_bidders - 1;
  for (std::size_t r = 0; r < regional; ++r) {
    GsvmBidder b{std::vector<double>(num_items, 0.0)};
    const std::size_t start = (r * num_items) / regional;
    std::vector<std::size_t> arc_items;
    for (std::size_t k = 0; k < arc; ++k) arc_items.push_back((start + k) % num_items);
    std::sort(arc_items.begin(), arc_items.end());
    for (std::size_t j : arc_items) b.item_values[j] = rng.uniform(0.0, 20.0);
    d.bidders.emplace_back(std::move(b));
  }
  GsvmBidder national{std::vector<double>(num_items, 0.0)};
  const std::size_t national_items = (2 * num_items + 2) / 3;
  for (std::size_t j = 0; j < national_items; ++j) national.item_values[j] = rng.uniform(0.0, 10.0);
  d.bidders.emplace_back(std::move(national));
  return d;
}

DomainInstance generate_two_wise(std::uint64_t seed, std::size_t num_items, std::size_t num_bidders) {
  if (num_items < 1 || num_bidders < 1) throw ParameterError("2-wise domain needs items and bidders");
  if (num_items > kMaxItems) throw DimensionError("too many items");
  Rng rng(seed, "twowise");
  DomainInstance d{"twowise", seed, num_items, {}};
  for (std::size_t i = 0; i < num_bidders; ++i) {
    TwoWiseBidder b;
    b.weights.resize(num_items);
    for (auto& w : b.weights) w = rng.uniform(0.0, 10.0);
    b.pair_weights.resize(num_items);
    for (std::size_t j = 0; j < num_items; ++j) {
      b.pair_weights[j].assign(j, 0.0);
      for (std::size_t k = 0; k < j; ++k) {
        if (rng.bernoulli(0.25)) b.pair_weights[j][k] = rng.uniform(-3.0, 6.0);
      }
    }
    d.bidders.emplace_back(std::move(b));
  }
  return d;
}

DomainInstance generate_domain(const std::string& generator, std::uint64_t seed, std::size_t num_items,
                               std::size_t num_bidders) {
  if (generator == "gsvm") return generate_gsvm(seed, num_items, num_bidders);
  if (generator == "twowise") return generate_two_wise(seed, num_items, num_bidders);
  throw ParameterError("unknown domain generator '" + generator + "'");
}

double bundle_price(const Bundle& x, const std::vector<double>& prices) {
  double total = 0.0;
  for (std::uint64_t rest = x.mask(); rest != 0; rest &= rest - 1) {
    total += prices[static_cast<std::size_t>(__builtin_ctzll(rest))];
  }
  return total;
}

namespace {

// Enumerates all submasks of `universe` and keeps the lexicographically
// smallest profit maximizer.
template <typename ValueFn>
Bundle best_profit_bundle(std::size_t m, std::uint64_t universe, const std::vector<double>& prices,
                          ValueFn&& value) {
  std::vector<std::pair<std::uint64_t, double>> profits;
  double best = 0.0;
  for (std::uint64_t sub = universe;; sub = (sub - 1) & universe) {
    const Bundle b(m, sub);
    const double profit = sub == 0 ? 0.0 : value(b) - bundle_price(b, prices);
    profits.emplace_back(sub, profit);
    best = std::max(best, profit);
    if (sub == 0) break;
  }
  std::uint64_t chosen = 0;
  bool found = false;
  for (const auto& [mask, profit] : profits) {
    if (profit >= best - kWelfareTolerance && (!found || lex_less_mask(mask, chosen))) {
      chosen = mask;
      found = true;
    }
  }
  return Bundle(m, chosen);
}

}  // namespace

Bundle true_demand(const Valuation& v, const std::vector<double>& prices) {
  const std::size_t m = num_items_of(v);
  if (prices.size() != m) throw DimensionError("price vector length differs from item count");
  std::uint64_t universe = full_mask(m);
  std::size_t enumerated = m;
  if (const auto* g = std::get_if<GsvmBidder>(&v)) {
    // Items outside the interest set add cost but no value.
    universe = g->interest_set().mask();
    enumerated = g->interest_set().count();
  }
  if (enumerated > 22) throw CapabilityError("demand query needs enumeration over more than 22 items");
  return best_profit_bundle(m, universe, prices, [&](const Bundle& b) { return value_of(v, b); });
}

BidderStrategy BidderStrategy::overbid(double z) {
  if (!(z >= 0.0 && z < 1.0)) throw ParameterError("overbidding share z must lie in [0, 1)");
  return {Kind::kOverbid, z};
}

double answer_query(const BidderStrategy& strategy, const Valuation& v, const Bundle& bundle,
                    double best_reported, double best_with_bundle) {
  const double truth = value_of(v, bundle);
  if (strategy.kind == BidderStrategy::Kind::kTruthful) return truth;
  if (best_reported <= best_with_bundle) return truth;
  return truth + strategy.z * (best_reported - best_with_bundle);
}

}  // namespace mlca
