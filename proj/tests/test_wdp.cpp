#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include "mlca/errors.hpp"
#include "mlca/rng.hpp"
#include "mlca/valuemodels.hpp"
#include "mlca/wdp.hpp"
#include "oracles.hpp"

using namespace mlca;

namespace {

Bundle B(const char* s) { return Bundle::from_string(s); }

std::shared_ptr<const LearnedValuation> lin(std::vector<double> w) {
  return std::make_shared<const LearnedValuation>(LinearModel{std::move(w)});
}

std::shared_ptr<const LearnedValuation> svr(KernelSpec k, std::vector<Bundle> svs, std::vector<double> coeffs) {
  SvrModel m;
  m.kernel = k;
  m.support_vectors = std::move(svs);
  m.coeffs = std::move(coeffs);
  return std::make_shared<const LearnedValuation>(m);
}

WdpProblem problem(std::size_t m, std::vector<std::shared_ptr<const LearnedValuation>> models) {
  WdpProblem p;
  p.num_items = m;
  p.economy = EconomyIndex::all(models.size());
  p.models = std::move(models);
  return p;
}

double oracle_value(const WdpProblem& p) {
  const auto best = oracle::enumerate_assignments(p.num_items, p.models.size(), p.economy.members(),
                                                  [&](const Allocation& a) {
                                                    if (!respects_exclusions(p, a)) {
                                                      return -std::numeric_limits<double>::infinity();
                                                    }
                                                    return learned_welfare(p, a);
                                                  });
  return best.value;
}

std::shared_ptr<const LearnedValuation> random_svr(Rng& rng, const KernelSpec& k, std::size_t m, std::size_t l) {
  std::vector<Bundle> svs;
  std::vector<double> cs;
  for (std::size_t s = 0; s < l; ++s) {
    svs.emplace_back(m, rng.below(full_mask(m) + 1));
    cs.push_back(rng.uniform(-3, 5));
  }
  return svr(k, svs, cs);
}

}  // namespace

TEST_CASE("enumeration examples") {
  auto p = problem(2, {lin({5, 0}), lin({0, 1})});
  auto s = solve_enumeration(p);
  CHECK(s.allocation == Allocation{{B("10"), B("01")}});
  CHECK(s.objective == doctest::Approx(6.0));
  CHECK(s.status == WdpStatus::kOptimal);

  auto z = problem(3, {lin({0, 0, 0}), lin({0, 0, 0})});
  CHECK(solve_enumeration(z).allocation == Allocation::empty(2, 3));
  CHECK(solve_enumeration(z).objective == 0.0);

  auto one = problem(2, {lin({1, 1})});
  one.exclusions = {{B("10"), B("01"), B("11")}};
  CHECK(solve_enumeration(one).allocation.bundles[0].empty());
}

TEST_CASE("linear ip examples") {
  auto p = problem(2, {lin({1, 9}), lin({3, 3})});
  auto s = solve_linear_ip(p);
  CHECK(s.allocation == Allocation{{B("01"), B("10")}});
  CHECK(s.objective == doctest::Approx(12.0));
  CHECK(s.status == WdpStatus::kOptimal);

  auto neg = problem(3, {lin({-1, -2, -3}), lin({-1, -1, -1})});
  CHECK(solve_linear_ip(neg).allocation == Allocation::empty(2, 3));

  p.exclusions = {{B("01")}, {}};
  auto cut = solve_linear_ip(p);
  CHECK(cut.allocation.bundles[0] != B("01"));
  CHECK(cut.objective == doctest::Approx(oracle_value(p)));
  CHECK(cut.objective == doctest::Approx(solve_enumeration(p).objective));

  auto q = problem(2, {svr(KernelSpec::quadratic(1), {B("11")}, {1.0})});
  CHECK_THROWS_AS(solve_linear_ip(q), ModelKindError);
}

TEST_CASE("quadratic examples") {
  auto p = problem(2, {svr(KernelSpec::quadratic(1), {B("11")}, {1.0})});
  auto s = solve_quadratic(p);
  CHECK(s.allocation.bundles[0] == B("11"));
  CHECK(s.objective == doctest::Approx(6.0));
  auto n = problem(2, {svr(KernelSpec::quadratic(1), {B("11")}, {-1.0})});
  CHECK(solve_quadratic(n).allocation.bundles[0].empty());
  CHECK(solve_quadratic(n).objective == doctest::Approx(0.0));
  auto e = problem(2, {svr(KernelSpec::exponential(2), {B("11")}, {1.0})});
  CHECK_THROWS_AS(solve_quadratic(e), ModelKindError);
  CHECK_THROWS_AS(solve_kernel_generic(p), ModelKindError);
}

TEST_CASE("random branch and bound instances match enumeration") {
  Rng rng(21, "test-wdp-random");
  const std::vector<KernelSpec> ks{KernelSpec::linear(), KernelSpec::quadratic(0.4), KernelSpec::exponential(3),
                                   KernelSpec::gaussian(3)};
  for (int t = 0; t < 40; ++t) {
    const auto& k = ks[static_cast<std::size_t>(t) % 4];
    const std::size_t m = 3 + rng.below(4);
    const std::size_t n = 1 + rng.below(3);
    std::vector<std::shared_ptr<const LearnedValuation>> models;
    for (std::size_t i = 0; i < n; ++i) models.push_back(random_svr(rng, k, m, 1 + rng.below(5)));
    auto p = problem(m, models);
    p.exclusions.assign(n, {});
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t ex = rng.below(4);
      for (std::size_t e = 0; e < ex; ++e) p.exclusions[i].emplace_back(m, rng.below(full_mask(m) + 1));
    }
    const auto s = solve(p);
    const double ref = oracle_value(p);
    CHECK(s.status == WdpStatus::kOptimal);
    CHECK(s.objective == doctest::Approx(ref).epsilon(1e-9));
    CHECK(std::abs(s.objective - ref) <= 1e-6);
    CHECK(respects_exclusions(p, s.allocation));
    CHECK(feasible(s.allocation, m));
    CHECK(s.objective <= s.bound + 1e-6);
    CHECK(s.bound - s.objective <= 1e-6);
    CHECK(learned_welfare(p, s.allocation) == doctest::Approx(s.objective));
  }
}

TEST_CASE("link constraint arithmetic") {
  // Dot product: x = {1,2}, a = {1,3} overlap 1. RBF: x = {1,2}, a = {2,3}, distance 2.
  CHECK(B("110").overlap(B("101")) == 1);
  CHECK(B("110").distance(B("011")) == 2);
  auto p = problem(3, {svr(KernelSpec::gaussian(2), {B("110")}, {1.0})});
  p.exclusions = {{B("110"), B("100"), B("010"), B("111")}};
  const auto s = solve_kernel_generic(p);
  // Every remaining bundle is at distance >= 2; "000" is the smallest at 2.
  CHECK(s.objective == doctest::Approx(std::exp(-1.0)));
  CHECK(s.allocation.bundles[0] == B("000"));
}

TEST_CASE("oracle models route to enumeration of true welfare") {
  const auto d = generate_gsvm(2, 8, 3);
  std::vector<std::shared_ptr<const LearnedValuation>> models;
  for (const auto& v : d.bidders) {
    models.push_back(std::make_shared<const LearnedValuation>(OracleModel{std::make_shared<const Valuation>(v)}));
  }
  const auto s = solve(problem(8, models));
  const auto star = efficient_allocation(d.value_fn(), EconomyIndex::all(3), 8);
  CHECK(s.objective == doctest::Approx(star.welfare));
}

TEST_CASE("timeouts return a feasible incumbent below the bound") {
  Rng rng(5, "test-wdp-timeout");
  std::vector<std::shared_ptr<const LearnedValuation>> models;
  for (int i = 0; i < 4; ++i) models.push_back(random_svr(rng, KernelSpec::quadratic(0.1), 10, 40));
  auto p = problem(10, models);
  p.time_limit = 0.001;
  const auto s = solve(p);
  CHECK(feasible(s.allocation, 10));
  CHECK(s.objective <= s.bound + 1e-6);
  CHECK((s.status == WdpStatus::kTimeoutFeasible || s.status == WdpStatus::kOptimal));
  if (s.status == WdpStatus::kOptimal) CHECK(s.bound - s.objective <= 1e-6);
}

TEST_CASE("lp dump") {
  auto p = problem(2, {lin({1, 9}), svr(KernelSpec::quadratic(1), {B("11")}, {1.0})});
  p.exclusions = {{B("01")}, {}};
  std::ostringstream os;
  write_lp(p, os);
  const auto text = os.str();
  CHECK(text.find("Maximize") != std::string::npos);
  CHECK(text.find("Subject To") != std::string::npos);
  CHECK(text.find("Binary") != std::string::npos);
  CHECK(text.find("End") != std::string::npos);
  const auto path = std::filesystem::temp_directory_path() / "mlca_test_dump.lp";
  p.lp_dump_path = path.string();
  solve(p);
  CHECK(std::filesystem::exists(path));
  std::filesystem::remove(path);
}
