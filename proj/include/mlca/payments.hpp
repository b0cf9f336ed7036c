#pragma once

#include <string>
#include <vector>

#include "mlca/core.hpp"

namespace mlca {

enum class PaymentRule { kVcg, kVcgNearest };

std::string payment_rule_name(PaymentRule rule);
/// Accepts "vcg", "vcg-nearest" and "vcg_nearest".
PaymentRule parse_payment_rule(const std::string& name);

/// Payments closest in Euclidean norm to VCG among those in the revealed
/// core: for every coalition C, Σ_{i∉C} p_i ≥ W_R(C) − Σ_{i∈C} v̂_i(a_i),
/// with p_i ≤ v̂_i(a_i). Enumerates all coalitions, so n ≤ 8.
Payments vcg_nearest_payments(const ReportProfile& reports, const Allocation& final_allocation);

/// The projection behind vcg_nearest_payments: `coalition_welfare[C]` is
/// W(C) for the coalition with bit mask C, `bids[i]` = v̂_i(a_i).
Payments nearest_core_point(const std::vector<double>& coalition_welfare, const std::vector<double>& bids,
                            const std::vector<double>& reference);
Payments vcg_nearest_payments(const ReportProfile& reports);

Payments compute_payments(PaymentRule rule, const ReportProfile& reports, const Allocation& final_allocation);

}  // namespace mlca
