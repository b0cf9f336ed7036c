#include <doctest.h>

#include <cmath>
#include <memory>

#include "mlca/errors.hpp"
#include "mlca/experiments.hpp"
#include "mlca/mlca.hpp"

using namespace mlca;

namespace {

Bundle B(const char* s) { return Bundle::from_string(s); }

// Two bidders, items A and B. Bidder 0's reported table may differ from its
// true table in the value of B.
DomainInstance example_domain(double v1_b) {
  DomainInstance d;
  d.generator = "table";
  d.num_items = 2;
  d.bidders.push_back(TableBidder::from_pairs(2, {{"10", 2}, {"01", v1_b}, {"11", 2}}));
  d.bidders.push_back(TableBidder::from_pairs(2, {{"10", 1}, {"01", 1}, {"11", 2}}));
  return d;
}

MlcaConfig example_config() {
  MlcaConfig cfg;
  cfg.q_max = 2;
  cfg.q_init = 1;
  cfg.q_round = 1;
  cfg.learner = LearnerSpec::linear(1e9);
  cfg.initial_queries = {{B("01")}, {B("11")}};
  return cfg;
}

}  // namespace

TEST_CASE("config validation and rounds") {
  MlcaConfig cfg;
  CHECK(cfg.rounds() == 5);
  cfg.q_init = 50;
  CHECK_THROWS_AS(cfg.validate(3), ParameterError);
  cfg = MlcaConfig{};
  cfg.q_round = 0;
  CHECK_THROWS_AS(cfg.validate(3), ParameterError);
  cfg = MlcaConfig{};
  cfg.learners = {LearnerSpec::oracle()};
  CHECK_THROWS_AS(cfg.validate(3), ParameterError);
}

TEST_CASE("query module on the first round of the manipulation example") {
  ReportProfile R{ReportSet(2), ReportSet(2)};
  R[0].add(B("01"), 1.1);
  R[1].add(B("11"), 2);
  const auto models = train_models(R, example_config(), {});
  CHECK(predict(*models[0], B("10")) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(predict(*models[0], B("01")) == doctest::Approx(1.1).epsilon(1e-6));
  CHECK(predict(*models[1], B("10")) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(predict(*models[1], B("01")) == doctest::Approx(1.0).epsilon(1e-6));
  const auto q = next_queries(EconomyIndex::all(2), R, {}, models);
  CHECK(q.bundles[0] == B("11"));
  CHECK(q.bundles[1] == B("10"));
  CHECK(q.asked == std::vector<bool>{true, true});
}

TEST_CASE("query module excludes reported bundles") {
  ReportProfile R{ReportSet(2)};
  R[0].add(B("10"), 5);
  MlcaConfig cfg;
  cfg.learner = LearnerSpec::linear(1e6);
  const auto q = next_queries(EconomyIndex::all(1), R, {}, cfg, {});
  CHECK(q.bundles[0] == B("11"));

  ReportProfile full{ReportSet(1)};
  full[0].add(B("1"), 1);
  CHECK_THROWS_AS(next_queries(EconomyIndex::all(1), full, {}, cfg, {}), ExhaustedBidderError);
}

TEST_CASE("oracle learners give the efficient allocation as queries") {
  const auto d = generate_gsvm(4, 8, 3);
  std::vector<std::shared_ptr<const Valuation>> truths;
  for (const auto& v : d.bidders) truths.push_back(std::make_shared<const Valuation>(v));
  MlcaConfig cfg;
  cfg.learner = LearnerSpec::oracle();
  ReportProfile R(3, ReportSet(8));
  const auto q = next_queries(EconomyIndex::all(3), R, {}, cfg, truths);
  const auto star = efficient_allocation(d.value_fn(), EconomyIndex::all(3), 8);
  for (std::size_t i = 0; i < 3; ++i) {
    if (!star.allocation.bundles[i].empty()) CHECK(q.bundles[i] == star.allocation.bundles[i]);
  }
}

TEST_CASE("example run, truthful") {
  const auto d = example_domain(1.1);
  const auto run = run_mlca(d, {}, example_config());
  CHECK(run.outcome.rounds == 1);
  CHECK(run.outcome.allocation == Allocation{{B("01"), B("10")}});
  CHECK(run.outcome.payments.amounts[0] == doctest::Approx(1.0));
  CHECK(utility(0, run.outcome.allocation, run.outcome.payments, d.value_fn()) == doctest::Approx(0.1));
}

TEST_CASE("example run, bidder 0 reports 0.9 for B") {
  const auto reported = example_domain(0.9);
  const auto run = run_mlca(reported, {}, example_config());
  // The main economy asks bidder 0 for A, as in the narrative.
  REQUIRE(run.outcome.trace.size() == 2);
  CHECK(run.outcome.trace[1].queries[0] == std::vector<Bundle>{B("10")});
  CHECK(run.outcome.reports[0].value(B("10")).value() == 2.0);
}

TEST_CASE("oracle MLCA is efficient") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto d = generate_gsvm(seed, 8, 3);
    MlcaConfig cfg;
    cfg.learner = LearnerSpec::oracle();
    cfg.q_max = 10;
    cfg.q_init = 4;
    cfg.q_round = 3;
    cfg.seed = seed;
    const auto run = run_mlca(d, {}, cfg);
    CHECK(efficiency(run.outcome.allocation, d.value_fn(), 8) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("runs respect the query cap, IR and no-deficit, and are deterministic") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    for (int q_round : {2, 4, 7}) {
      const auto d = generate_two_wise(seed, 6, 3);
      MlcaConfig cfg;
      cfg.q_max = 20;
      cfg.q_init = 6;
      cfg.q_round = q_round;
      cfg.seed = seed;
      cfg.learner = LearnerSpec::svr(KernelSpec::quadratic(0.1), 0.0, 1e4);
      const auto run = run_mlca(d, {}, cfg);
      for (std::size_t i = 0; i < 3; ++i) CHECK(run.outcome.reports[i].size() <= 20u);
      CHECK(count_ir_deficit_violations(run.outcome) == 0);
      const auto again = run_mlca(d, {}, cfg);
      CHECK(again.outcome.allocation == run.outcome.allocation);
      CHECK(again.outcome.payments.amounts == run.outcome.payments.amounts);
      for (std::size_t t = 0; t < run.outcome.trace.size(); ++t) {
        CHECK(again.outcome.trace[t].queries == run.outcome.trace[t].queries);
      }
      // Reported welfare of the main economy never decreases.
      for (std::size_t t = 1; t < run.reported_welfare.size(); ++t) {
        CHECK(run.reported_welfare[t] >= run.reported_welfare[t - 1] - 1e-9);
      }
    }
  }
}

TEST_CASE("no rounds when Q_max equals Q_init") {
  const auto d = generate_gsvm(5, 6, 3);
  MlcaConfig cfg;
  cfg.q_max = 5;
  cfg.q_init = 5;
  cfg.seed = 5;
  const auto run = run_mlca(d, {}, cfg);
  CHECK(run.outcome.rounds == 0);
  CHECK(run.economies.empty());
  CHECK(count_ir_deficit_violations(run.outcome) == 0);
}

TEST_CASE("small domains") {
  DomainInstance d = example_domain(1.1);
  MlcaConfig cfg;
  cfg.q_init = 4;
  cfg.q_max = 6;
  CHECK_THROWS_AS(run_mlca(d, {}, cfg), DomainTooSmallError);
  // Everything is asked at initialization; later rounds have nothing left.
  cfg.q_init = 3;
  cfg.q_round = 1;
  const auto run = run_mlca(d, {}, cfg);
  for (std::size_t i = 0; i < 2; ++i) CHECK(run.outcome.reports[i].size() == 3u);
}

TEST_CASE("push bids") {
  const auto d = generate_gsvm(2, 6, 2);
  MlcaConfig cfg;
  cfg.q_max = 8;
  cfg.q_init = 4;
  cfg.q_round = 2;
  cfg.p_max = 1;
  const Bundle x(6, 0b11);
  const auto run = run_mlca(d, {}, cfg, {{{x, d.value(0, x)}}, {}});
  CHECK(run.outcome.reports[0].value(x).has_value());
  CHECK_THROWS_AS(run_mlca(d, {}, cfg, {{{x, 1.0}, {Bundle(6, 0b100), 1.0}}, {}}), ParameterError);
}

TEST_CASE("sampled marginals and the main economy are both queried") {
  const auto d = generate_gsvm(3, 6, 4);
  MlcaConfig cfg;
  cfg.q_max = 9;
  cfg.q_init = 3;
  cfg.q_round = 3;
  cfg.seed = 3;
  const auto run = run_mlca(d, {}, cfg);
  int main_calls = 0;
  for (const auto& e : run.economies) main_calls += e.economy.tag() == "main";
  CHECK(main_calls == cfg.rounds());
  // 4 bidders x 2 sampled marginals + 1 main per round.
  CHECK(run.economies.size() == static_cast<std::size_t>(cfg.rounds()) * 9u);
}

TEST_CASE("swa diagnostic") {
  const auto d = generate_gsvm(6, 6, 3);
  MlcaConfig cfg;
  cfg.q_max = 10;
  cfg.q_init = 4;
  cfg.q_round = 3;
  cfg.seed = 6;
  const auto truthful = run_mlca(d, {}, cfg);
  const auto swa = swa_diagnostic(truthful, d, cfg);
  for (double delta : swa.delta) CHECK(delta == 0.0);

  const auto manip = run_mlca(d, {BidderStrategy::overbid(0.5), BidderStrategy::truthful(), BidderStrategy::truthful()}, cfg);
  const auto swa2 = swa_diagnostic(manip, d, cfg);
  CHECK(swa2.delta.size() == 3);
  CHECK_FALSE(manip.won_misreported_bundle[1]);
  CHECK_FALSE(manip.won_misreported_bundle[2]);
}

TEST_CASE("overbidding follows the threshold rule") {
  const auto d = generate_gsvm(7, 6, 3);
  MlcaConfig cfg;
  cfg.q_max = 10;
  cfg.q_init = 4;
  cfg.q_round = 3;
  cfg.seed = 7;
  const auto run = run_mlca(d, {BidderStrategy::overbid(0.99), {}, {}}, cfg);
  // No report is ever below the true value.
  for (const auto& r : run.outcome.reports[0].reports()) CHECK(r.value >= d.value(0, r.bundle) - 1e-12);
  const auto table = others_welfare_table(d, 0);
  const auto star = efficient_allocation(d.value_fn(), EconomyIndex::without(3, 0), 6);
  CHECK(table[full_mask(6)] == doctest::Approx(star.welfare));
}
