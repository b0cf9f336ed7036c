#include "mlca/cca.hpp"

#include <algorithm>
#include <ostream>
#include <unordered_map>

#include "mlca/errors.hpp"
#include "mlca/rng.hpp"

namespace mlca {

namespace {

constexpr double kIncrement = 1.05;
// Over-demanded items priced at zero would never move under a purely
// multiplicative increment.
constexpr double kMinimumPrice = 0.01;

}  // namespace

std::string heuristic_name(CcaHeuristic h) {
  switch (h) {
    case CcaHeuristic::kClock: return "clock";
    case CcaHeuristic::kClockRaised: return "clock-raised";
    case CcaHeuristic::kProfitMax: return "profit-max";
  }
  return "?";
}

CcaHeuristic parse_heuristic(const std::string& name) {
  std::string s = name;
  std::replace(s.begin(), s.end(), '_', '-');
  if (s == "clock") return CcaHeuristic::kClock;
  if (s == "clock-raised") return CcaHeuristic::kClockRaised;
  if (s == "profit-max") return CcaHeuristic::kProfitMax;
  throw ParameterError("unknown supplementary heuristic '" + name + "'");
}

std::vector<double> init_reserve_prices(const DomainInstance& domain, std::uint64_t seed) {
  const std::size_t m = domain.num_items;
  const std::size_t n = domain.num_bidders();
  if (n == 0 || m == 0) throw ParameterError("reserve prices need bidders and items");
  Rng rng(seed, "cca-reserve-prices");
  std::vector<double> sum(m, 0.0);
  std::vector<std::size_t> count(m, 0);
  for (int s = 0; s < 10000; ++s) {
    const auto bidder = static_cast<std::size_t>(rng.below(n));
    const Bundle b(m, rng.below(full_mask(m)) + 1);
    const double per_item = domain.value(bidder, b) / static_cast<double>(b.count());
    for (std::size_t j : b.items()) {
      sum[j] += per_item;
      ++count[j];
    }
  }
  std::vector<double> prices(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    if (count[j] > 0) prices[j] = 0.01 * sum[j] / static_cast<double>(count[j]);
  }
  return prices;
}

ClockState clock_phase(const DomainInstance& domain, std::vector<double> prices, int max_rounds) {
  const std::size_t m = domain.num_items;
  const std::size_t n = domain.num_bidders();
  if (prices.size() != m) throw DimensionError("one price per item expected");
  ClockState st;
  st.over_demand.assign(m, 0);
  while (true) {
    ++st.round;
    std::vector<Bundle> demand;
    for (std::size_t i = 0; i < n; ++i) demand.push_back(true_demand(domain.bidders[i], prices));
    std::vector<int> demanders(m, 0);
    for (const Bundle& d : demand) {
      for (std::size_t j : d.items()) ++demanders[j];
    }
    st.price_history.push_back(prices);
    st.demand_history.push_back(std::move(demand));
    bool over = false;
    for (std::size_t j = 0; j < m; ++j) {
      st.over_demand[j] = std::max(0, demanders[j] - 1);
      over = over || st.over_demand[j] > 0;
    }
    if (!over) break;
    if (st.round >= max_rounds) {
      st.capped = true;
      break;
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (st.over_demand[j] > 0) prices[j] = std::max(prices[j] * kIncrement, kMinimumPrice);
    }
  }
  st.prices = std::move(prices);
  return st;
}

ReportProfile supplementary_bids(CcaHeuristic heuristic, const ClockState& state, const DomainInstance& domain,
                                 std::size_t profit_max_q) {
  const std::size_t m = domain.num_items;
  const std::size_t n = domain.num_bidders();
  if (heuristic == CcaHeuristic::kProfitMax && m > 22) {
    throw CapabilityError("profit-max bids enumerate all bundles and support at most 22 items");
  }
  ReportProfile out(n, ReportSet(m));
  for (std::size_t i = 0; i < n; ++i) {
    // Unique clock bundles in first-demanded order, with the highest price
    // quoted for each.
    std::vector<Bundle> order;
    std::unordered_map<std::uint64_t, double> highest;
    for (std::size_t r = 0; r < state.demand_history.size(); ++r) {
      const Bundle& b = state.demand_history[r][i];
      if (b.empty()) continue;
      const double price = bundle_price(b, state.price_history[r]);
      auto it = highest.find(b.mask());
      if (it == highest.end()) {
        highest.emplace(b.mask(), price);
        order.push_back(b);
      } else {
        it->second = std::max(it->second, price);
      }
    }
    if (heuristic == CcaHeuristic::kClock) {
      for (const Bundle& b : order) out[i].add(b, highest[b.mask()]);
      continue;
    }
    for (const Bundle& b : order) out[i].add(b, domain.value(i, b));
    if (heuristic != CcaHeuristic::kProfitMax) continue;

    struct Candidate {
      std::uint64_t mask;
      double profit;
    };
    std::vector<Candidate> all;
    for (std::uint64_t mask = 1; mask <= full_mask(m); ++mask) {
      const Bundle b(m, mask);
      all.push_back({mask, domain.value(i, b) - bundle_price(b, state.prices)});
    }
    const std::size_t keep = std::min(profit_max_q, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                      [](const Candidate& a, const Candidate& b) {
                        if (a.profit != b.profit) return a.profit > b.profit;
                        return lex_less_mask(a.mask, b.mask);
                      });
    for (std::size_t k = 0; k < keep; ++k) {
      const Bundle b(m, all[k].mask);
      if (!out[i].contains(b)) out[i].add(b, domain.value(i, b));
    }
  }
  return out;
}

CcaRun run_cca(const DomainInstance& domain, const CcaConfig& cfg) {
  CcaRun run;
  run.clock = clock_phase(domain, init_reserve_prices(domain, cfg.seed), cfg.max_rounds);
  ReportProfile bids = supplementary_bids(cfg.heuristic, run.clock, domain, cfg.profit_max_q);
  const std::size_t n = domain.num_bidders();
  run.outcome.allocation = wdp_over_reports(bids, EconomyIndex::all(n));
  run.outcome.payments = compute_payments(cfg.payment_rule, bids, run.outcome.allocation);
  run.outcome.rounds = run.clock.round + (cfg.heuristic == CcaHeuristic::kClock ? 0 : 1);
  run.outcome.reports = std::move(bids);
  return run;
}

void write_clock_trace_csv(const ClockState& state, std::ostream& os) {
  os << "round,item,price,demanders\n";
  for (std::size_t r = 0; r < state.price_history.size(); ++r) {
    const auto& prices = state.price_history[r];
    for (std::size_t j = 0; j < prices.size(); ++j) {
      int demanders = 0;
      for (const Bundle& b : state.demand_history[r]) demanders += b.contains(j) ? 1 : 0;
      os << (r + 1) << "," << j << "," << prices[j] << "," << demanders << "\n";
    }
  }
}

}  // namespace mlca
