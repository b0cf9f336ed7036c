#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "mlca/bundle.hpp"
#include "mlca/core.hpp"

namespace mlca {

/// Global-synergy bidder: v(x) = Σ_{j∈x̄} v_j · (1 + 0.2(|x̄| − 1)) where x̄
/// is the part of x the bidder is interested in (items with v_j > 0).
struct GsvmBidder {
  std::vector<double> item_values;

  std::size_t num_items() const { return item_values.size(); }
  Bundle interest_set() const;
  double value(const Bundle& x) const;
};

/// 2-wise dependent valuation: v(x) = max(0, Σ_{j∈x} (w_j + Σ_{j'∈x, j'<j} w_{j,j'})).
struct TwoWiseBidder {
  std::vector<double> weights;
  /// Row j holds w_{j,j'} for j' < j (row j has j entries).
  std::vector<std::vector<double>> pair_weights;

  std::size_t num_items() const { return weights.size(); }
  double raw_value(const Bundle& x) const;
  double value(const Bundle& x) const;
};

/// Explicit value table indexed by bundle mask; for toy instances.
struct TableBidder {
  std::size_t items = 0;
  std::vector<double> values;

  static TableBidder from_pairs(std::size_t num_items, const std::vector<std::pair<std::string, double>>& entries);
  std::size_t num_items() const { return items; }
  double value(const Bundle& x) const;
};

using Valuation = std::variant<GsvmBidder, TwoWiseBidder, TableBidder>;

double value_of(const Valuation& v, const Bundle& x);
std::size_t num_items_of(const Valuation& v);

/// Rewrites a GSVM bidder as an equivalent 2-wise valuation
/// (w_j = v_j, w_{j,j'} = 0.2(v_j + v_j') on pairs of interest items).
TwoWiseBidder to_two_wise(const GsvmBidder& b);

struct DomainInstance {
  std::string generator;
  std::uint64_t seed = 0;
  std::size_t num_items = 0;
  std::vector<Valuation> bidders;

  std::size_t num_bidders() const { return bidders.size(); }
  double value(std::size_t bidder, const Bundle& x) const;
  /// The returned function refers to this instance and must not outlive it.
  BundleValueFn value_fn() const;
};

/// n−1 regional bidders on contiguous arcs of ⌈m/3⌉ items of a ring (values
/// U[0,20]) and one national bidder, last, on the first ⌈2m/3⌉ items
/// (values U[0,10]).
DomainInstance generate_gsvm(std::uint64_t seed, std::size_t num_items, std::size_t num_bidders);

/// w_j ~ U[0,10]; each w_{j,j'} is nonzero with probability 0.25, U[−3,6].
DomainInstance generate_two_wise(std::uint64_t seed, std::size_t num_items, std::size_t num_bidders);

/// Dispatch on generator id ("gsvm" or "twowise").
DomainInstance generate_domain(const std::string& generator, std::uint64_t seed, std::size_t num_items,
                               std::size_t num_bidders);

/// Profit-maximizing bundle at linear item prices; ties go to the
/// lexicographically smallest bundle, and the empty bundle (profit 0) is
/// always a candidate. Throws CapabilityError above 22 enumerated items.
Bundle true_demand(const Valuation& v, const std::vector<double>& prices);

double bundle_price(const Bundle& x, const std::vector<double>& prices);

struct BidderStrategy {
  enum class Kind { kTruthful, kOverbid };
  Kind kind = Kind::kTruthful;
  /// Share of V_R − V_T(b) added on top of the true value; 0 ≤ z < 1.
  double z = 0.0;

  static BidderStrategy truthful() { return {}; }
  static BidderStrategy overbid(double z);
  bool needs_oracle() const { return kind == Kind::kOverbid; }
};

/// The value a bidder reports for `bundle` under `strategy`. `best_reported`
/// (V_R) and `best_with_bundle` (V_T(b)) are only read for overbidding.
double answer_query(const BidderStrategy& strategy, const Valuation& v, const Bundle& bundle,
                    double best_reported, double best_with_bundle);

}  // namespace mlca
