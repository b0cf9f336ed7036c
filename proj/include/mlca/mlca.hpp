#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "mlca/core.hpp"
#include "mlca/learning.hpp"
#include "mlca/payments.hpp"
#include "mlca/rng.hpp"
#include "mlca/valuemodels.hpp"
#include "mlca/wdp.hpp"

namespace mlca {

/// `count` distinct nonempty bundles drawn uniformly, avoiding `taken`.
std::vector<Bundle> sample_nonempty_bundles(std::size_t m, std::size_t count,
                                            const std::unordered_set<std::uint64_t>& taken, Rng& rng);

struct MlcaConfig {
  int q_max = 40;
  int q_init = 12;
  int q_round = 5;
  /// Cap on push bids per bidder.
  int p_max = 0;
  /// Used for every bidder unless `learners` has one entry per bidder.
  LearnerSpec learner;
  std::vector<LearnerSpec> learners;
  std::uint64_t seed = 0;
  PaymentRule payment_rule = PaymentRule::kVcg;
  double wdp_time_limit = 60.0;
  /// Replaces the random initial queries of a bidder when its entry is
  /// nonempty (must then hold q_init bundles).
  std::vector<std::vector<Bundle>> initial_queries;

  /// T = ⌊(Q_max − Q_init) / Q_round⌋.
  int rounds() const;
  const LearnerSpec& learner_for(std::size_t bidder) const;
  /// Throws ParameterError on inconsistent settings.
  void validate(std::size_t num_bidders) const;
};

/// The next value query per bidder, generated by one economy.
struct QueryProfile {
  EconomyIndex economy;
  std::vector<Bundle> bundles;
  /// False for bidders outside the economy or without any new bundle left.
  std::vector<bool> asked;
  /// Tag of the generating economy, recorded in the trace only.
  std::vector<std::string> provenance;
};

/// One query-module call: the models it used and the learned optimum before
/// fresh-query substitution.
struct EconomyRecord {
  int round = 0;
  EconomyIndex economy;
  std::vector<std::shared_ptr<const LearnedValuation>> models;
  Allocation learned_optimum;
  double learned_objective = 0.0;
  WdpStatus status = WdpStatus::kOptimal;
  double gap = 0.0;
  double seconds = 0.0;
  QueryProfile queries;
};

struct QueryOptions {
  double time_limit = 60.0;
  /// Give exhausted bidders an empty, unasked slot instead of throwing.
  bool skip_exhausted = false;
};

/// Trains each member's model on its reports.
std::vector<std::shared_ptr<const LearnedValuation>> train_models(
    const ReportProfile& reports, const MlcaConfig& cfg, const std::vector<std::shared_ptr<const Valuation>>& truths);

/// Query module with pre-trained models. `generated[i]` holds the bundles
/// already queued for bidder i this round.
QueryProfile next_queries(const EconomyIndex& economy, const ReportProfile& reports,
                          const std::vector<std::vector<Bundle>>& generated,
                          const std::vector<std::shared_ptr<const LearnedValuation>>& models,
                          const QueryOptions& options = {}, EconomyRecord* record = nullptr);

/// Query module that trains the models itself.
QueryProfile next_queries(const EconomyIndex& economy, const ReportProfile& reports,
                          const std::vector<std::vector<Bundle>>& generated, const MlcaConfig& cfg,
                          const std::vector<std::shared_ptr<const Valuation>>& truths);

struct MlcaRun {
  AuctionOutcome outcome;
  std::vector<EconomyRecord> economies;
  /// Reported welfare of wdp_over_reports(R, N) after initialization and
  /// after every round.
  std::vector<double> reported_welfare;
  /// Per bidder: allocated a bundle whose report differs from its value.
  std::vector<bool> won_misreported_bundle;
  /// Total query-module WDP time and worst relative gap.
  double wdp_seconds = 0.0;
  double worst_gap = 0.0;
};

MlcaRun run_mlca(const DomainInstance& domain, const std::vector<BidderStrategy>& strategies, const MlcaConfig& cfg,
                 const std::vector<std::vector<BundleValueReport>>& push_bids = {});

/// Everything elicited by `outcome`, evaluated at true values: V_R.
double best_elicited_welfare(const ReportProfile& reports, const DomainInstance& domain);

/// Best welfare of everybody but `bidder` on each subset of items, indexed
/// by item mask. V_T(b) = v_i(b) + table[complement of b].
std::vector<double> others_welfare_table(const DomainInstance& domain, std::size_t bidder);

struct SwaReport {
  /// Reported welfare of each marginal economy N∖{i} in the run and in the
  /// truthful rerun, and their difference.
  std::vector<double> manipulated;
  std::vector<double> truthful;
  std::vector<double> delta;
};

/// Reruns `cfg` with every bidder truthful and compares marginal-economy
/// reported welfare.
SwaReport swa_diagnostic(const MlcaRun& run, const DomainInstance& domain, const MlcaConfig& cfg);

}  // namespace mlca
