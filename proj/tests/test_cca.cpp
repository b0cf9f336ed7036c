#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "mlca/cca.hpp"
#include "mlca/errors.hpp"
#include "mlca/rng.hpp"

using namespace mlca;

namespace {

Bundle B(const char* s) { return Bundle::from_string(s); }

DomainInstance from_bidders(std::size_t m, std::vector<Valuation> bidders) {
  DomainInstance d;
  d.generator = "custom";
  d.num_items = m;
  d.bidders = std::move(bidders);
  return d;
}

}  // namespace

TEST_CASE("heuristic names") {
  CHECK(parse_heuristic("profit_max") == CcaHeuristic::kProfitMax);
  CHECK(heuristic_name(parse_heuristic("clock-raised")) == "clock-raised");
  CHECK_THROWS_AS(parse_heuristic("sealed"), ParameterError);
}

TEST_CASE("reserve prices") {
  TwoWiseBidder additive{std::vector<double>(4, 100.0), {{}, {0}, {0, 0}, {0, 0, 0}}};
  const auto d = from_bidders(4, {additive, additive});
  for (double p : init_reserve_prices(d, 3)) CHECK(p == doctest::Approx(1.0).epsilon(1e-12));

  TwoWiseBidder zero{std::vector<double>(4, 0.0), {{}, {0}, {0, 0}, {0, 0, 0}}};
  for (double p : init_reserve_prices(from_bidders(4, {zero}), 3)) CHECK(p == 0.0);

  // Independent recomputation with the same stream.
  const auto g = generate_gsvm(9, 12, 5);
  const auto prices = init_reserve_prices(g, 9);
  Rng rng(9, "cca-reserve-prices");
  std::vector<double> sum(12, 0.0);
  std::vector<double> cnt(12, 0.0);
  for (int s = 0; s < 10000; ++s) {
    const auto i = rng.below(5);
    const auto mask = rng.below(4095) + 1;
    const Bundle b(12, mask);
    const double share = g.value(i, b) / static_cast<double>(__builtin_popcountll(mask));
    for (std::size_t j = 0; j < 12; ++j) {
      if ((mask >> j) & 1U) {
        sum[j] += share;
        cnt[j] += 1;
      }
    }
  }
  for (std::size_t j = 0; j < 12; ++j) CHECK(std::abs(prices[j] - 0.01 * sum[j] / cnt[j]) <= 1e-9);
}

TEST_CASE("clock raises over-demanded prices by five percent") {
  Valuation v = TableBidder::from_pairs(2, {{"10", 200}});
  const auto d = from_bidders(2, {v, v});
  const auto st = clock_phase(d, {100, 100});
  REQUIRE(st.price_history.size() >= 2);
  CHECK(st.price_history[1][0] == doctest::Approx(105.0));
  CHECK(st.price_history[1][1] == 100.0);
  CHECK(st.over_demand[0] == 0);
  CHECK_FALSE(st.capped);

  Valuation lone = TableBidder::from_pairs(2, {{"10", 5}});
  const auto one = clock_phase(from_bidders(2, {lone}), {1, 1});
  CHECK(one.round == 1);
}

TEST_CASE("clock terminates without over-demand on the demand example") {
  Valuation v = TableBidder::from_pairs(2, {{"10", 2}, {"01", 0.5}, {"11", 2.2}});
  Valuation w = TableBidder::from_pairs(2, {{"10", 1.5}, {"01", 1}, {"11", 2}});
  const auto d = from_bidders(2, {v, w});
  const auto st = clock_phase(d, {0.1, 0.1});
  // Replay: demand at the final prices has no shared item.
  std::vector<int> count(2, 0);
  for (const auto& val : d.bidders) {
    for (std::size_t j : true_demand(val, st.prices).items()) ++count[j];
  }
  CHECK(count[0] <= 1);
  CHECK(count[1] <= 1);
  CHECK(st.demand_history.back()[0] == true_demand(v, st.prices));
}

TEST_CASE("prices are monotone with exact increments") {
  const auto d = generate_gsvm(4, 10, 4);
  const auto st = clock_phase(d, init_reserve_prices(d, 4));
  for (std::size_t r = 1; r < st.price_history.size(); ++r) {
    for (std::size_t j = 0; j < 10; ++j) {
      int demanders = 0;
      for (const auto& b : st.demand_history[r - 1]) demanders += b.contains(j);
      const double before = st.price_history[r - 1][j];
      const double after = st.price_history[r][j];
      if (demanders >= 2) {
        CHECK(after == std::max(before * 1.05, 0.01));
      } else {
        CHECK(after == before);
      }
    }
  }
}

TEST_CASE("supplementary bids") {
  // Bidder 0 demands {A} while it is the only one interested in it.
  Valuation v = TableBidder::from_pairs(3, {{"100", 9}, {"110", 3}});
  const auto d = from_bidders(3, {v});
  ClockState st;
  st.price_history = {{3, 1, 1}, {7, 1, 1}};
  st.demand_history = {{B("100")}, {B("100")}};
  st.prices = {7, 1, 1};
  const auto clock = supplementary_bids(CcaHeuristic::kClock, st, d);
  CHECK(clock[0].value(B("100")).value() == 7.0);
  CHECK(clock[0].size() == 1);
  const auto raised = supplementary_bids(CcaHeuristic::kClockRaised, st, d);
  CHECK(raised[0].value(B("100")).value() == 9.0);

  const auto pm = supplementary_bids(CcaHeuristic::kProfitMax, st, d, 4);
  // Independent top-4 by profit at final prices; ties by bit string.
  std::vector<std::pair<double, std::string>> ranked;
  for (std::uint64_t x = 1; x < 8; ++x) {
    const Bundle b(3, x);
    ranked.emplace_back(-(d.value(0, b) - bundle_price(b, st.prices)), b.to_string());
  }
  std::sort(ranked.begin(), ranked.end());
  for (int k = 0; k < 4; ++k) CHECK(pm[0].contains(Bundle::from_string(ranked[k].second)));
  CHECK(pm[0].size() <= 5);
  for (const auto& r : pm[0].reports()) CHECK(r.value == d.value(0, r.bundle));
}

TEST_CASE("cca runs") {
  Valuation lone = GsvmBidder{{4, 5, 0}};
  const auto single = run_cca(from_bidders(3, {lone}), {});
  CHECK(single.outcome.allocation.bundles[0] == B("110"));
  CHECK(single.outcome.payments.amounts[0] == 0.0);

  const auto disjoint = from_bidders(4, {GsvmBidder{{3, 4, 0, 0}}, GsvmBidder{{0, 0, 6, 2}}});
  for (auto h : {CcaHeuristic::kClock, CcaHeuristic::kClockRaised, CcaHeuristic::kProfitMax}) {
    CcaConfig cfg;
    cfg.heuristic = h;
    const auto run = run_cca(disjoint, cfg);
    CHECK(efficiency(run.outcome.allocation, disjoint.value_fn(), 4) == doctest::Approx(1.0));
    CHECK(run.outcome.rounds == run.clock.round + (h == CcaHeuristic::kClock ? 0 : 1));
  }

  double clock_eff = 0.0;
  double pm_eff = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto g = generate_gsvm(seed, 8, 4);
    CcaConfig cfg;
    cfg.seed = seed;
    clock_eff += efficiency(run_cca(g, cfg).outcome.allocation, g.value_fn(), 8);
    cfg.heuristic = CcaHeuristic::kProfitMax;
    const auto pm = run_cca(g, cfg);
    pm_eff += efficiency(pm.outcome.allocation, g.value_fn(), 8);
    for (std::size_t i = 0; i < 4; ++i) {
      const double bid = pm.outcome.reports[i].value_or_throw(pm.outcome.allocation.bundles[i]);
      CHECK(pm.outcome.payments.amounts[i] >= -1e-9);
      CHECK(pm.outcome.payments.amounts[i] <= bid + 1e-9);
    }
  }
  CHECK(pm_eff >= clock_eff - 1e-9);
}

TEST_CASE("clock trace csv") {
  Valuation v = TableBidder::from_pairs(2, {{"10", 200}});
  const auto st = clock_phase(from_bidders(2, {v, v}), {100, 100});
  std::ostringstream os;
  write_clock_trace_csv(st, os);
  CHECK(os.str().rfind("round,item,price,demanders\n1,0,100,2\n", 0) == 0);
}
