#include <doctest.h>

#include <cmath>

#include "mlca/bundle.hpp"
#include "mlca/core.hpp"
#include "mlca/errors.hpp"
#include "mlca/rng.hpp"
#include "mlca/valuemodels.hpp"
#include "oracles.hpp"

using namespace mlca;

namespace {

Bundle B(const char* s) { return Bundle::from_string(s); }

ReportSet reports(std::size_t m, std::initializer_list<std::pair<const char*, double>> entries) {
  ReportSet r(m);
  for (const auto& [b, v] : entries) r.add(B(b), v);
  return r;
}

}  // namespace

TEST_CASE("bundle string form and order") {
  const Bundle a = B("100");
  CHECK(a.contains(0));
  CHECK_FALSE(a.contains(1));
  CHECK(a.to_string() == "100");
  CHECK(a.count() == 1);
  CHECK(B("110").overlap(B("011")) == 1);
  CHECK(B("110").distance(B("011")) == 2);
  CHECK(lex_less(B("001"), B("100")));
  CHECK(lex_less(B("000"), B("001")));
  CHECK_FALSE(lex_less(B("100"), B("100")));
  CHECK_THROWS_AS(Bundle::from_string("10x"), DimensionError);
  for (std::uint64_t x = 0; x < 16; ++x) {
    for (std::uint64_t y = 0; y < 16; ++y) {
      CHECK(lex_less_mask(x, y) == lex_less(Bundle(4, x), Bundle(4, y)));
      CHECK(lex_less(Bundle(4, x), Bundle(4, y)) == (Bundle(4, x).to_string() < Bundle(4, y).to_string()));
    }
  }
}

TEST_CASE("rng streams are reproducible and keyed by purpose") {
  Rng a(7, "x"), b(7, "x"), c(7, "y");
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    differs |= va != c.next_u64();
  }
  CHECK(differs);
  Rng u(1, "uniform");
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    CHECK(u.below(7) < 7);
  }
}

TEST_CASE("feasible") {
  CHECK(feasible({{B("10"), B("01")}}, 2));
  CHECK_FALSE(feasible({{B("10"), B("10")}}, 2));
  CHECK(feasible(Allocation::empty(3, 2), 2));
  CHECK_THROWS_AS(feasible({{B("100"), B("01")}}, 2), DimensionError);
}

TEST_CASE("report set semantics") {
  ReportSet r(2);
  r.add(B("11"), 3);
  CHECK(r.contains(B("00")));
  CHECK(r.value(B("00")).value() == 0.0);
  CHECK_FALSE(r.value(B("10")).has_value());
  CHECK_THROWS_AS(r.value_or_throw(B("10")), UndefinedReportError);
  CHECK_THROWS_AS(r.add(B("11"), 1), ParameterError);
  CHECK_THROWS_AS(r.add(B("00"), 1), ParameterError);
  CHECK_THROWS_AS(r.add(B("10"), -1), ParameterError);
  CHECK_THROWS_AS(r.add(B("100"), 1), DimensionError);
}

TEST_CASE("reported welfare") {
  ReportProfile R{reports(2, {{"11", 3}}), reports(2, {{"10", 2}, {"01", 2}, {"11", 4}})};
  const auto all = EconomyIndex::all(2);
  CHECK(reported_welfare({{B("11"), B("00")}}, R, all) == 3.0);
  CHECK(reported_welfare(Allocation::empty(2, 2), R, all) == 0.0);
  CHECK(reported_welfare({{B("00"), B("11")}}, R, all) == 4.0);
  CHECK_THROWS_AS(reported_welfare({{B("10"), B("00")}}, R, all), UndefinedReportError);
}

TEST_CASE("wdp over reports examples") {
  {
    ReportProfile R{reports(2, {{"11", 3}}), reports(2, {{"10", 2}, {"01", 2}, {"11", 4}})};
    const auto a = wdp_over_reports(R, EconomyIndex::all(2));
    CHECK(a == Allocation{{B("00"), B("11")}});
    const auto p = vcg_payments_on_reports(R);
    CHECK(p.amounts[0] == doctest::Approx(0.0));
    CHECK(p.amounts[1] == doctest::Approx(3.0));
  }
  {
    ReportProfile R{reports(2, {{"10", 5}}), reports(2, {{"01", 1}})};
    const auto a = wdp_over_reports(R, EconomyIndex::all(2));
    CHECK(a == Allocation{{B("10"), B("01")}});
    CHECK(reported_welfare(a, R, EconomyIndex::all(2)) == 6.0);
    const auto p = vcg_payments_on_reports(R);
    CHECK(p.amounts[0] == doctest::Approx(0.0));
    CHECK(p.amounts[1] == doctest::Approx(0.0));
  }
  {
    ReportProfile R{ReportSet(3), ReportSet(3)};
    CHECK(wdp_over_reports(R, EconomyIndex::all(2)) == Allocation::empty(2, 3));
  }
  {
    ReportProfile R{reports(1, {{"1", 5}})};
    CHECK(vcg_payments_on_reports(R).amounts[0] == 0.0);
  }
}

TEST_CASE("wdp over reports matches brute force; VCG is IR and no-deficit") {
  Rng rng(11, "test-wdp-reports");
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 2 + rng.below(4);
    const std::size_t n = 1 + rng.below(4);
    ReportProfile R;
    for (std::size_t i = 0; i < n; ++i) {
      ReportSet r(m);
      const std::size_t k = rng.below(7);
      for (std::size_t t = 0; t < k; ++t) {
        const Bundle b(m, 1 + rng.below(full_mask(m)));
        if (r.contains(b)) continue;
        r.add(b, std::round(rng.uniform(0, 10)));
      }
      R.push_back(r);
    }
    const auto all = EconomyIndex::all(n);
    const auto a = wdp_over_reports(R, all);
    CHECK(feasible(a, m));
    CHECK(reported_welfare(a, R, all) == doctest::Approx(oracle::best_report_combination(R, oracle::iota(n))));
    for (std::size_t i = 0; i < n && n > 1; ++i) {
      const auto marg = wdp_over_reports(R, EconomyIndex::without(n, i));
      CHECK(marg.bundles[i].empty());
      std::vector<std::size_t> others;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) others.push_back(j);
      }
      CHECK(reported_welfare(marg, R, all) == doctest::Approx(oracle::best_report_combination(R, others)));
    }
    const auto p = vcg_payments_on_reports(R, a);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(p.amounts[i] >= -1e-9);
      CHECK(R[i].value(a.bundles[i]).value() - p.amounts[i] >= -1e-9);
    }
  }
}

TEST_CASE("utility") {
  auto v = [](std::size_t, const Bundle& x) { return x == Bundle::from_string("01") ? 1.1 : (x.empty() ? 0.0 : 2.0); };
  Allocation a{{B("01"), B("00")}};
  CHECK(utility(0, a, {{1.0, 0.0}}, v) == doctest::Approx(0.1));
  CHECK(utility(1, a, {{1.0, 0.0}}, v) == 0.0);
  Allocation b{{B("10"), B("00")}};
  CHECK(utility(0, b, {{1.0, 0.0}}, v) == doctest::Approx(1.0));
}

TEST_CASE("efficiency against enumeration") {
  const auto d = generate_gsvm(3, 6, 3);
  const auto fn = d.value_fn();
  const auto best = oracle::enumerate_assignments(6, 3, oracle::iota(3), [&](const Allocation& a) {
    return social_welfare(a, fn);
  });
  const auto star = efficient_allocation(fn, EconomyIndex::all(3), 6);
  CHECK(star.welfare == doctest::Approx(best.value));
  CHECK(efficiency(star.allocation, fn, 6) == doctest::Approx(1.0));
  CHECK(efficiency(Allocation::empty(3, 6), fn, 6) == 0.0);
  Rng rng(5, "test-eff");
  for (int t = 0; t < 20; ++t) {
    Allocation a = Allocation::empty(3, 6);
    for (std::size_t j = 0; j < 6; ++j) {
      const auto o = rng.below(4);
      if (o < 3) a.bundles[o] = a.bundles[o].with(j);
    }
    CHECK(efficiency(a, fn, 6) == doctest::Approx(social_welfare(a, fn) / best.value));
  }
  auto zero = [](std::size_t, const Bundle&) { return 0.0; };
  CHECK_THROWS_AS(efficiency(Allocation::empty(2, 3), zero, 3), DegenerateInstanceError);
}

TEST_CASE("dense welfare oracle honours allowed masks") {
  const auto d = generate_two_wise(9, 5, 3);
  auto prob = tabulate(d.value_fn(), EconomyIndex::all(3), 5);
  // Forbid bidder 0 from holding item 0.
  prob.allowed.assign(3, {});
  prob.allowed[0].assign(32, 1);
  for (std::uint64_t x = 0; x < 32; ++x) {
    if (x & 1U) prob.allowed[0][x] = 0;
  }
  const auto res = maximize_dense(prob);
  const auto fn = d.value_fn();
  const auto best = oracle::enumerate_assignments(5, 3, oracle::iota(3), [&](const Allocation& a) {
    if (a.bundles[0].contains(0)) return -std::numeric_limits<double>::infinity();
    return social_welfare(a, fn);
  });
  CHECK(res.feasible);
  CHECK_FALSE(res.allocation.bundles[0].contains(0));
  CHECK(res.welfare == doctest::Approx(best.value));
}

TEST_CASE("economy tags") {
  CHECK(EconomyIndex::all(3).tag() == "main");
  CHECK(EconomyIndex::without(3, 1).tag() == "marginal:1");
  CHECK(EconomyIndex::without(3, 1).size() == 2);
  CHECK_FALSE(EconomyIndex::without(3, 1).contains(1));
}
