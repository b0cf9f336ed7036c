#include "mlca/payments.hpp"

#include <algorithm>
#include <cmath>

#include "mlca/errors.hpp"

namespace mlca {

std::string payment_rule_name(PaymentRule rule) { return rule == PaymentRule::kVcg ? "vcg" : "vcg-nearest"; }

PaymentRule parse_payment_rule(const std::string& name) {
  if (name == "vcg") return PaymentRule::kVcg;
  if (name == "vcg-nearest" || name == "vcg_nearest") return PaymentRule::kVcgNearest;
  throw ParameterError("unknown payment rule '" + name + "'");
}

namespace {

// One constraint g·p ≥ h.
struct Halfspace {
  std::vector<double> g;
  double h = 0.0;
  double norm2 = 0.0;
};

}  // namespace

Payments nearest_core_point(const std::vector<double>& coalition_welfare, const std::vector<double>& bids,
                            const std::vector<double>& reference) {
  const std::size_t n = bids.size();
  if (n > 8) throw CapabilityError("core payments enumerate coalitions and support at most 8 bidders");
  if (reference.size() != n || coalition_welfare.size() != (std::size_t{1} << n)) {
    throw DimensionError("core projection inputs do not match the number of bidders");
  }
  std::vector<Halfspace> cons;
  const std::uint32_t all = (1U << n) - 1;
  for (std::uint32_t c = 1; c < all; ++c) {
    Halfspace hs;
    hs.g.assign(n, 0.0);
    hs.h = coalition_welfare[c];
    for (std::size_t i = 0; i < n; ++i) {
      if ((c >> i) & 1U) {
        hs.h -= bids[i];
      } else {
        hs.g[i] = 1.0;
        hs.norm2 += 1.0;
      }
    }
    cons.push_back(std::move(hs));
  }
  for (std::size_t i = 0; i < n; ++i) {
    Halfspace hs;
    hs.g.assign(n, 0.0);
    hs.g[i] = -1.0;
    hs.h = -bids[i];
    hs.norm2 = 1.0;
    cons.push_back(std::move(hs));
  }

  // Hildreth's dual coordinate ascent for min ½‖p − reference‖² s.t. g·p ≥ h.
  std::vector<double> p = reference;
  std::vector<double> mult(cons.size(), 0.0);
  for (int sweep = 0; sweep < 200000; ++sweep) {
    double worst = 0.0;
    for (std::size_t k = 0; k < cons.size(); ++k) {
      const Halfspace& hs = cons[k];
      double gp = 0.0;
      for (std::size_t i = 0; i < n; ++i) gp += hs.g[i] * p[i];
      worst = std::max(worst, hs.h - gp);
      const double next = std::max(0.0, mult[k] + (hs.h - gp) / hs.norm2);
      const double step = next - mult[k];
      if (step == 0.0) continue;
      mult[k] = next;
      for (std::size_t i = 0; i < n; ++i) p[i] += step * hs.g[i];
    }
    if (worst <= 1e-12) break;
  }

  Payments out;
  out.amounts.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Snap the remaining numerical slack into the feasible box.
    out.amounts[i] = std::clamp(p[i], std::min(reference[i], bids[i]), bids[i]);
  }
  return out;
}

Payments vcg_nearest_payments(const ReportProfile& reports, const Allocation& final_allocation) {
  const std::size_t n = reports.size();
  if (n > 8) throw CapabilityError("VCG-nearest enumerates coalitions and supports at most 8 bidders");
  const Payments vcg = vcg_payments_on_reports(reports, final_allocation);
  if (n <= 1) return vcg;
  std::vector<double> bids(n);
  for (std::size_t i = 0; i < n; ++i) bids[i] = reports[i].value_or_throw(final_allocation.bundles[i]);
  std::vector<double> welfare(std::size_t{1} << n, 0.0);
  for (std::uint32_t c = 1; c < welfare.size(); ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if ((c >> i) & 1U) members.push_back(i);
    }
    const EconomyIndex economy(n, members);
    welfare[c] = reported_welfare(wdp_over_reports(reports, economy), reports, economy);
  }
  return nearest_core_point(welfare, bids, vcg.amounts);
}

Payments vcg_nearest_payments(const ReportProfile& reports) {
  return vcg_nearest_payments(reports, wdp_over_reports(reports, EconomyIndex::all(reports.size())));
}

Payments compute_payments(PaymentRule rule, const ReportProfile& reports, const Allocation& final_allocation) {
  return rule == PaymentRule::kVcg ? vcg_payments_on_reports(reports, final_allocation)
                                   : vcg_nearest_payments(reports, final_allocation);
}

}  // namespace mlca
