#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mlca/errors.hpp"
#include "mlca/experiments.hpp"

using namespace mlca;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.domain = {"gsvm", 6, 3};
  cfg.first_seed = 1;
  cfg.last_seed = 3;
  cfg.mlca.q_max = 10;
  cfg.mlca.q_init = 4;
  cfg.mlca.q_round = 3;
  cfg.mlca.learner = LearnerSpec::svr(KernelSpec::quadratic(0.1), 0.0, 1e4);
  return cfg;
}

// Every line has as many fields as the header.
void check_columns(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  long fields = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const long f = std::count(line.begin(), line.end(), ',');
    if (fields < 0) fields = f;
    CHECK(f == fields);
  }
}

}  // namespace

TEST_CASE("summary statistics") {
  const auto s = summarize({1, 2, 3});
  CHECK(s.mean == doctest::Approx(2.0));
  CHECK(s.std_err == doctest::Approx(1.0 / std::sqrt(3.0)));
  CHECK(summarize({4}).std_err == 0.0);
}

TEST_CASE("anova p-values") {
  // Reference values from scipy.stats.f_oneway.
  CHECK(anova_p_value({{1, 2, 3}, {4, 5, 6}}) == doctest::Approx(0.02131164112875672).epsilon(1e-9));
  CHECK(anova_p_value({{1.5, 2.25, 3, 0.5}, {4, 5, 6}, {2, 2.5, 9, 1, 1}}) ==
        doctest::Approx(0.2639891278005566).epsilon(1e-9));
  CHECK(anova_p_value({{1, 1}, {1, 1}}) == 1.0);
  CHECK(anova_p_value({{1, 2}, {1, 2}}) == 1.0);
  CHECK_THROWS_AS(anova_p_value({{1, 2}}), ParameterError);
}

TEST_CASE("seed ranges and roles") {
  std::uint64_t a = 0, b = 0;
  parse_seed_range("3..7", a, b);
  CHECK(a == 3);
  CHECK(b == 7);
  parse_seed_range("5", a, b);
  CHECK(a == 5);
  CHECK(b == 5);
  CHECK_THROWS_AS(parse_seed_range("7..3", a, b), ParameterError);
  CHECK_THROWS_AS(parse_seed_range("x", a, b), ParameterError);
  CHECK(parse_role("national", 5) == 4);
  CHECK(parse_role("regional", 5) == 0);
  CHECK(parse_role("2", 5) == 2);
  CHECK_THROWS_AS(parse_role("9", 5), ParameterError);
}

TEST_CASE("random allocations") {
  const auto a = random_allocation(10, 3, 4);
  CHECK(feasible(a, 10));
  CHECK(a == random_allocation(10, 3, 4));
}

TEST_CASE("batch rows") {
  auto cfg = small_config();
  cfg.mechanisms = {"mlca", "cca", "vcg", "random"};
  const auto rows = run_batch(cfg);
  REQUIRE(rows.size() == 4);
  for (const auto& s : rows[2].per_seed) CHECK(s.efficiency == 1.0);
  for (const auto& s : rows[0].per_seed) CHECK(s.revenue <= s.efficiency + 1e-9);
  CHECK(rows[3].efficiency.mean < rows[0].efficiency.mean);
  for (const auto& r : rows) {
    for (const auto& s : r.per_seed) {
      CHECK(s.efficiency <= 1.0 + 1e-9);
      if (r.mechanism != "random") CHECK(s.revenue_core >= s.revenue - 1e-9);
    }
  }
  std::ostringstream a, b;
  write_results_csv(rows, a, false);
  write_results_csv(run_batch(cfg), b, false);
  CHECK(a.str() == b.str());
  CHECK(a.str().find("wd_solve_time") == std::string::npos);
  check_columns(a.str());
  std::ostringstream t;
  write_seed_csv(rows, t, true);
  CHECK(t.str().find("wd_solve_time") != std::string::npos);
  check_columns(t.str());

  cfg.mechanisms = {"auction"};
  CHECK_THROWS_AS(run_batch(cfg), ParameterError);
}

TEST_CASE("kernel grid") {
  auto cfg = small_config();
  cfg.first_seed = 1;
  cfg.last_seed = 2;
  cfg.sample_sizes = {10, 20};
  cfg.epsilons = {0.0, 1.0, 4.0};
  const auto rows = kernel_grid(cfg);
  CHECK(rows.size() == 4 * 3 * 2);
  for (const auto& r : rows) {
    CHECK(r.efficiency.mean <= 1.0 + 1e-9);
    CHECK(r.optimality_gap.mean == 0.0);
  }
  std::ostringstream a, b;
  write_grid_csv(rows, a, false);
  write_grid_csv(kernel_grid(cfg), b, false);
  CHECK(a.str() == b.str());
  check_columns(a.str());
  cfg.sample_sizes = {100};
  CHECK_THROWS_AS(kernel_grid(cfg), DomainTooSmallError);
}

TEST_CASE("manipulation study") {
  auto cfg = small_config();
  const auto table = manipulation_study(cfg, 2, {0.0, 0.5});
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[1].utility_samples == table.rows[0].utility_samples);
  CHECK(table.rows[1].efficiency_samples == table.rows[0].efficiency_samples);
  for (const auto& r : table.rows) CHECK(r.misreported_wins == 0);
  CHECK(table.p_utility >= 0.0);
  CHECK(table.p_utility <= 1.0);
  std::ostringstream os;
  write_manipulation_csv(table, os);
  CHECK(os.str().rfind("strategy,", 0) == 0);
  check_columns(os.str());
}
