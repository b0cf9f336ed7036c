#include <doctest.h>

#include "mlca/diagnostics.hpp"
#include "mlca/errors.hpp"
#include "mlca/serialization.hpp"

using namespace mlca;

TEST_CASE("domain and config round trip") {
  for (const char* gen : {"gsvm", "twowise"}) {
    const auto d = generate_domain(gen, 3, 7, 3);
    const auto back = domain_from_json(to_json(d));
    CHECK(back.num_items == 7);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::uint64_t x = 0; x < 128; ++x) CHECK(back.value(i, Bundle(7, x)) == d.value(i, Bundle(7, x)));
    }
  }
  MlcaConfig cfg;
  cfg.q_max = 17;
  cfg.seed = 44;
  cfg.learner = LearnerSpec::svr(KernelSpec::gaussian(3), 0.5, 200);
  cfg.payment_rule = PaymentRule::kVcgNearest;
  const auto c = mlca_config_from_json(to_json(cfg));
  CHECK(c.q_max == 17);
  CHECK(c.seed == 44);
  CHECK(c.learner.kernel.kind == KernelKind::kGaussian);
  CHECK(c.learner.epsilon == 0.5);
  CHECK(c.payment_rule == PaymentRule::kVcgNearest);
}

TEST_CASE("learned models round trip") {
  ReportSet r(4);
  r.add(Bundle::from_string("1100"), 3);
  r.add(Bundle::from_string("0110"), 5);
  const LearnedValuation m = train_svr(r, KernelSpec::quadratic(0.2), 0.0, 10);
  const auto back = model_from_json(to_json(m), 4);
  for (std::uint64_t x = 0; x < 16; ++x) CHECK(predict(back, Bundle(4, x)) == predict(m, Bundle(4, x)));
}

TEST_CASE("replay reproduces a run; tampering is detected") {
  const auto d = generate_gsvm(4, 6, 3);
  MlcaConfig cfg;
  cfg.q_max = 10;
  cfg.q_init = 4;
  cfg.q_round = 3;
  cfg.seed = 4;
  const std::vector<BidderStrategy> strategies{BidderStrategy::truthful(), BidderStrategy::overbid(0.5),
                                               BidderStrategy::truthful()};
  const auto run = run_mlca(d, strategies, cfg);
  auto file = make_replay(d, cfg, strategies, run);
  const auto again = replay(Json::parse(file.dump()));
  CHECK(again.outcome.allocation == run.outcome.allocation);
  file["config"]["seed"] = 5;
  CHECK_THROWS_AS(replay(file), Error);
}

TEST_CASE("trace supports offline certification") {
  const auto d = generate_gsvm(2, 6, 3);
  MlcaConfig cfg;
  cfg.q_max = 10;
  cfg.q_init = 4;
  cfg.q_round = 3;
  cfg.seed = 2;
  const auto run = run_mlca(d, {}, cfg);
  const auto trace = make_trace(d, run);
  DomainInstance loaded;
  const auto rebuilt = run_from_trace(Json::parse(trace.dump()), loaded);
  const auto a = bound_report(run, d);
  const auto b = bound_report(rebuilt, loaded);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].economy == b[k].economy);
    CHECK(a[k].delta1 == doctest::Approx(b[k].delta1));
    CHECK(a[k].slack == doctest::Approx(b[k].slack));
  }
}
