#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mlca/core.hpp"
#include "mlca/payments.hpp"
#include "mlca/valuemodels.hpp"

namespace mlca {

enum class CcaHeuristic { kClock, kClockRaised, kProfitMax };

std::string heuristic_name(CcaHeuristic h);
/// Accepts "clock", "clock-raised" and "profit-max" (underscores too).
CcaHeuristic parse_heuristic(const std::string& name);

struct ClockState {
  /// Prices after the last round.
  std::vector<double> prices;
  int round = 0;
  /// Per round: the quoted prices and each bidder's demanded bundle.
  std::vector<std::vector<double>> price_history;
  std::vector<std::vector<Bundle>> demand_history;
  /// Over-demand of the last round: max(0, #demanders − 1) per item.
  std::vector<int> over_demand;
  /// True when the round cap stopped the clock.
  bool capped = false;
};

/// 1% of the mean per-item imputed value (bundle value split equally among
/// its items) over 10,000 sampled (bidder, nonempty bundle) pairs.
std::vector<double> init_reserve_prices(const DomainInstance& domain, std::uint64_t seed);

/// Ascending clock: truthful demand, ×1.05 on every over-demanded item.
ClockState clock_phase(const DomainInstance& domain, std::vector<double> prices, int max_rounds = 1000);

ReportProfile supplementary_bids(CcaHeuristic heuristic, const ClockState& state, const DomainInstance& domain,
                                 std::size_t profit_max_q = 40);

struct CcaConfig {
  CcaHeuristic heuristic = CcaHeuristic::kClock;
  PaymentRule payment_rule = PaymentRule::kVcg;
  std::size_t profit_max_q = 40;
  std::uint64_t seed = 0;
  int max_rounds = 1000;
};

struct CcaRun {
  AuctionOutcome outcome;
  ClockState clock;
};

CcaRun run_cca(const DomainInstance& domain, const CcaConfig& cfg);

/// One row per round and item: round, item, price, demanders.
void write_clock_trace_csv(const ClockState& state, std::ostream& os);

}  // namespace mlca
