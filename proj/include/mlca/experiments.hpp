#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mlca/cca.hpp"
#include "mlca/learning.hpp"
#include "mlca/mlca.hpp"
#include "mlca/payments.hpp"

namespace mlca {

struct DomainSpec {
  std::string generator = "gsvm";
  std::size_t num_items = 12;
  std::size_t num_bidders = 5;
};

struct ExperimentConfig {
  DomainSpec domain;
  std::uint64_t first_seed = 1;
  std::uint64_t last_seed = 30;
  /// Any of "mlca", "cca", "vcg", "random".
  std::vector<std::string> mechanisms{"mlca"};
  MlcaConfig mlca;
  CcaConfig cca;
  PaymentRule payment_rule = PaymentRule::kVcg;
  /// Grid axes for kernel_grid.
  std::vector<KernelSpec> kernels;
  std::vector<double> epsilons;
  std::vector<int> sample_sizes{20, 40, 80};
  /// Wall-clock columns are left out of CSV output unless set, so that
  /// reruns are byte-identical.
  bool include_timing = false;

  std::vector<std::uint64_t> seeds() const;
  void validate() const;
};

/// Parses "A..B" or a single seed.
void parse_seed_range(const std::string& text, std::uint64_t& first, std::uint64_t& last);

struct Stat {
  double mean = 0.0;
  double std_err = 0.0;
};

/// Mean and sample standard deviation / √k.
Stat summarize(const std::vector<double>& samples);

struct SeedResult {
  std::uint64_t seed = 0;
  double efficiency = 0.0;
  double revenue = 0.0;
  double revenue_core = 0.0;
  double rounds = 0.0;
  double learning_error = 0.0;
  double wd_solve_time = 0.0;
  double optimality_gap = 0.0;
};

struct ResultRow {
  std::string mechanism;
  std::string ml;
  std::string heuristic;
  std::string payment;
  std::vector<SeedResult> per_seed;
  Stat efficiency;
  Stat revenue;
  Stat revenue_core;
  Stat rounds;
  Stat learning_error;
  Stat wd_solve_time;
  Stat optimality_gap;
};

/// Counts IR (p_i ≤ v̂_i(a_i)) and no-deficit (p_i ≥ 0) violations at
/// reported values.
int count_ir_deficit_violations(const AuctionOutcome& outcome, double tolerance = 1e-7);

/// Uniform random item → (bidder or nobody) assignment.
Allocation random_allocation(std::size_t num_items, std::size_t num_bidders, std::uint64_t seed);

std::vector<ResultRow> run_batch(const ExperimentConfig& cfg);
void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& os, bool include_timing);
void write_seed_csv(const std::vector<ResultRow>& rows, std::ostream& os, bool include_timing);

struct GridRow {
  KernelSpec kernel;
  double epsilon = 0.0;
  int sample_size = 0;
  Stat efficiency;
  Stat learning_error;
  Stat wd_solve_time;
  Stat optimality_gap;
  Stat support_vectors;
};

/// Trains every bidder on Q random truthful reports and scores the learned
/// optimum, for each (kernel, ε, Q) cell.
std::vector<GridRow> kernel_grid(const ExperimentConfig& cfg);
void write_grid_csv(const std::vector<GridRow>& rows, std::ostream& os, bool include_timing);

/// One-way ANOVA p-value; 1 when every observation is equal.
double anova_p_value(const std::vector<std::vector<double>>& groups);

struct ManipulationRow {
  std::string strategy;
  Stat efficiency;
  Stat marginal_welfare;
  Stat utility;
  std::vector<double> efficiency_samples;
  std::vector<double> marginal_samples;
  std::vector<double> utility_samples;
  int misreported_wins = 0;
};

struct ManipulationTable {
  std::size_t manipulator = 0;
  std::vector<ManipulationRow> rows;
  double p_efficiency = 1.0;
  double p_marginal = 1.0;
  double p_utility = 1.0;
};

/// "national" (the last GSVM bidder), "regional" (bidder 0) or an index.
std::size_t parse_role(const std::string& role, std::size_t num_bidders);

/// Truthful plus one overbidding row per z, on paired seeds.
ManipulationTable manipulation_study(const ExperimentConfig& cfg, std::size_t manipulator,
                                     const std::vector<double>& z_values);
void write_manipulation_csv(const ManipulationTable& table, std::ostream& os);

}  // namespace mlca
