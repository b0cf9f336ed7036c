#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mlca/bundle.hpp"

namespace mlca {

/// Absolute tolerance for all welfare comparisons.
inline constexpr double kWelfareTolerance = 1e-9;

/// One bundle per bidder; `bundles[i]` is a_i.
struct Allocation {
  std::vector<Bundle> bundles;

  static Allocation empty(std::size_t num_bidders, std::size_t num_items);
  std::size_t num_bidders() const { return bundles.size(); }
  friend bool operator==(const Allocation&, const Allocation&) = default;
};

/// Bidder-major lexicographic order used for every tie-break.
bool lex_less(const Allocation& a, const Allocation& b);

struct BundleValueReport {
  Bundle bundle;
  double value = 0.0;
};

/// Append-only set of bundle-value reports of one bidder.
///
/// The empty bundle is implicitly reported at value 0 and never stored.
class ReportSet {
 public:
  ReportSet() = default;
  explicit ReportSet(std::size_t num_items) : num_items_(num_items) {}

  /// Throws DimensionError on width mismatch and ParameterError on a
  /// duplicate bundle, an explicit empty bundle or a negative/non-finite value.
  void add(const Bundle& bundle, double value);

  std::size_t num_items() const { return num_items_; }
  /// Number of explicit reports (the implicit empty report is not counted).
  std::size_t size() const { return reports_.size(); }
  bool empty() const { return reports_.empty(); }
  const std::vector<BundleValueReport>& reports() const { return reports_; }

  /// True for reported bundles and for the empty bundle.
  bool contains(const Bundle& bundle) const;
  /// v̂_i(x); nullopt when x was never reported. The empty bundle maps to 0.
  std::optional<double> value(const Bundle& bundle) const;
  /// v̂_i(x); throws UndefinedReportError for unreported nonempty bundles.
  double value_or_throw(const Bundle& bundle) const;

 private:
  std::size_t num_items_ = 0;
  std::vector<BundleValueReport> reports_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

using ReportProfile = std::vector<ReportSet>;

struct Payments {
  std::vector<double> amounts;
  double total() const;
};

/// Index set I ⊆ N of an economy, kept sorted.
class EconomyIndex {
 public:
  EconomyIndex() = default;
  EconomyIndex(std::size_t num_bidders, std::vector<std::size_t> members);

  static EconomyIndex all(std::size_t num_bidders);
  static EconomyIndex without(std::size_t num_bidders, std::size_t excluded);

  std::size_t num_bidders() const { return num_bidders_; }
  const std::vector<std::size_t>& members() const { return members_; }
  bool contains(std::size_t bidder) const;
  std::size_t size() const { return members_.size(); }
  /// "main" for the full economy, "marginal:i" for N \ {i}, else a list.
  std::string tag() const;

 private:
  std::size_t num_bidders_ = 0;
  std::vector<std::size_t> members_;
};

/// Queries sent and values received in one auction round.
struct RoundRecord {
  int round = 0;
  /// Per bidder, in the order they were delivered.
  std::vector<std::vector<Bundle>> queries;
  std::vector<std::vector<double>> answers;
  double seconds = 0.0;
};

struct AuctionOutcome {
  Allocation allocation;
  Payments payments;
  int rounds = 0;
  std::vector<RoundRecord> trace;
  /// Everything elicited by the end of the auction.
  ReportProfile reports;
};

/// v_i(x) for bidder i; the true or learned value profile of an instance.
using BundleValueFn = std::function<double(std::size_t bidder, const Bundle& bundle)>;

bool feasible(const Allocation& a, std::size_t num_items);

double reported_welfare(const Allocation& a, const ReportProfile& reports, const EconomyIndex& economy);

/// Reported-welfare maximizer over allocations built from each bidder's
/// reports (or the empty bundle); bidders outside the economy get nothing.
Allocation wdp_over_reports(const ReportProfile& reports, const EconomyIndex& economy);

/// VCG payments at the reported values, given the final allocation
/// computed by wdp_over_reports over the full economy.
Payments vcg_payments_on_reports(const ReportProfile& reports, const Allocation& final_allocation);
Payments vcg_payments_on_reports(const ReportProfile& reports);

double utility(std::size_t bidder, const Allocation& a, const Payments& p, const BundleValueFn& values);

/// V(a) = Σ_i v_i(a_i) over the bidders of the economy.
double social_welfare(const Allocation& a, const BundleValueFn& values);

/// eff(a) = V(a) / V(a*), with a* from the exact dense oracle.
double efficiency(const Allocation& a, const BundleValueFn& values, std::size_t num_items);
double efficiency_against(const Allocation& a, const BundleValueFn& values, double optimal_welfare);

// ---------------------------------------------------------------------------
// Exact welfare maximization by dynamic programming over item subsets.

/// Per participating bidder: a value and an "allowed" flag for every one of
/// the 2^m bundles. Cost is |layers| * 3^m.
struct DenseWelfareProblem {
  std::size_t num_items = 0;
  std::size_t num_bidders = 0;
  /// Bidder index of each layer, ascending.
  std::vector<std::size_t> bidders;
  std::vector<std::vector<double>> values;
  /// Empty inner vector means every bundle is allowed.
  std::vector<std::vector<char>> allowed;
};

struct DenseWelfareResult {
  bool feasible = false;
  Allocation allocation;
  double welfare = 0.0;
};

/// True when the dense oracle can handle `layers` bidders over `num_items`.
bool dense_oracle_supports(std::size_t layers, std::size_t num_items);

/// Exact argmax; ties resolved to the lexicographically smallest allocation.
/// Throws CapabilityError when the instance is too large.
DenseWelfareResult maximize_dense(const DenseWelfareProblem& problem);

/// Tabulates `values` for the bidders of `economy` over all bundles.
DenseWelfareProblem tabulate(const BundleValueFn& values, const EconomyIndex& economy, std::size_t num_items);

/// a* for a full value profile.
DenseWelfareResult efficient_allocation(const BundleValueFn& values, const EconomyIndex& economy,
                                        std::size_t num_items);

}  // namespace mlca
