#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mlca/core.hpp"
#include "mlca/learning.hpp"
#include "mlca/mlca.hpp"
#include "mlca/valuemodels.hpp"

namespace mlca {

/// Per-bidder bundle prices π_i; π_i(∅) is always 0.
using PriceProfile = std::vector<std::shared_ptr<const LearnedValuation>>;

double price_of(const PriceProfile& prices, std::size_t bidder, const Bundle& x);

struct ClearingCertificate {
  Allocation allocation;
  /// β_i = max_x (v_i − π_i)(x) − (v_i − π_i)(a_i).
  std::vector<double> beta;
  /// γ = max_a Σ π_i(a_i) − Σ π_i(a*_i).
  double gamma = 0.0;
  double delta = 0.0;
};

/// Exact subsidies needed to trade `allocation` at `prices`, by enumeration
/// of demand and supply sets (m ≤ 12).
ClearingCertificate certify_clearing(const PriceProfile& prices, const Allocation& allocation,
                                     const DomainInstance& domain);

/// Learning-error measurements of one query-module call.
struct BoundRecord {
  int round = 0;
  std::string economy;
  /// max_{i∈I} |ṽ_i − v_i| at ã and at a*_I.
  double delta1 = 0.0;
  double delta2 = 0.0;
  /// 1 − V_I(ã) / V_I(a*_I) and its bound |I|(δ1+δ2)/V_I(a*_I).
  double eff_loss = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  /// Main economy only: the same bound against the final allocation.
  std::optional<double> final_eff_loss;
  std::optional<double> final_slack;
  /// Main economy on small instances: certified δ at π = ṽ and a*, with the
  /// all-bundle error δ1' = max_i max_x |ṽ_i − v_i| and n(δ1' + δ2').
  std::optional<double> clearing_delta;
  std::optional<double> delta1_all;
  std::optional<double> clearing_bound;
};

/// One record per economy record of `run`. Clearing certificates are added
/// for the main economy when `with_clearing` and m ≤ 12.
std::vector<BoundRecord> bound_report(const MlcaRun& run, const DomainInstance& domain, bool with_clearing = true);

/// round, economy, delta1, delta2, eff_loss, bound, slack, clearing_delta
void write_bound_csv(const std::vector<BoundRecord>& records, std::ostream& os);

}  // namespace mlca
