#include "mlca/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>

#include "mlca/errors.hpp"

namespace mlca {

double price_of(const PriceProfile& prices, std::size_t bidder, const Bundle& x) {
  return x.empty() ? 0.0 : predict(*prices.at(bidder), x);
}

ClearingCertificate certify_clearing(const PriceProfile& prices, const Allocation& allocation,
                                     const DomainInstance& domain) {
  const std::size_t m = domain.num_items;
  const std::size_t n = domain.num_bidders();
  if (m > 12) throw CapabilityError("clearing certificates enumerate demand sets and need m <= 12");
  if (prices.size() != n || allocation.bundles.size() != n) throw DimensionError("one price function per bidder");
  const std::size_t states = std::size_t{1} << m;

  ClearingCertificate cert;
  cert.allocation = allocation;
  for (std::size_t i = 0; i < n; ++i) {
    double best = 0.0;  // the empty bundle
    for (std::uint64_t mask = 1; mask < states; ++mask) {
      const Bundle x(m, mask);
      best = std::max(best, domain.value(i, x) - price_of(prices, i, x));
    }
    const Bundle& a = allocation.bundles[i];
    cert.beta.push_back(std::max(0.0, best - (domain.value(i, a) - price_of(prices, i, a))));
  }
  const auto supply = efficient_allocation(
      [&](std::size_t i, const Bundle& x) { return price_of(prices, i, x); }, EconomyIndex::all(n), m);
  double at_allocation = 0.0;
  for (std::size_t i = 0; i < n; ++i) at_allocation += price_of(prices, i, allocation.bundles[i]);
  cert.gamma = std::max(0.0, supply.welfare - at_allocation);
  cert.delta = cert.gamma;
  for (double b : cert.beta) cert.delta += b;
  return cert;
}

std::vector<BoundRecord> bound_report(const MlcaRun& run, const DomainInstance& domain, bool with_clearing) {
  const std::size_t m = domain.num_items;
  const std::size_t n = domain.num_bidders();
  const BundleValueFn v = domain.value_fn();
  std::map<std::string, DenseWelfareResult> optimum;
  auto optimum_for = [&](const EconomyIndex& economy) -> const DenseWelfareResult& {
    auto it = optimum.find(economy.tag());
    if (it == optimum.end()) it = optimum.emplace(economy.tag(), efficient_allocation(v, economy, m)).first;
    return it->second;
  };
  const DenseWelfareResult& main_opt = optimum_for(EconomyIndex::all(n));
  const double final_welfare = social_welfare(run.outcome.allocation, v);

  std::vector<BoundRecord> out;
  for (const EconomyRecord& rec : run.economies) {
    const DenseWelfareResult& opt = optimum_for(rec.economy);
    BoundRecord br;
    br.round = rec.round;
    br.economy = rec.economy.tag();
    double learned_welfare_true = 0.0;
    for (std::size_t i : rec.economy.members()) {
      const Bundle& at = rec.learned_optimum.bundles[i];
      const Bundle& as = opt.allocation.bundles[i];
      br.delta1 = std::max(br.delta1, std::abs(predict(*rec.models[i], at) - v(i, at)));
      br.delta2 = std::max(br.delta2, std::abs(predict(*rec.models[i], as) - v(i, as)));
      learned_welfare_true += v(i, at);
    }
    const double size = static_cast<double>(rec.economy.size());
    if (opt.welfare > 0.0) {
      br.eff_loss = 1.0 - learned_welfare_true / opt.welfare;
      br.bound = size * (br.delta1 + br.delta2) / opt.welfare;
    }
    br.slack = br.bound - br.eff_loss;

    if (rec.economy.size() == n) {
      if (main_opt.welfare > 0.0) {
        br.final_eff_loss = 1.0 - final_welfare / main_opt.welfare;
        br.final_slack = br.bound - *br.final_eff_loss;
      }
      if (with_clearing && m <= 12) {
        const ClearingCertificate cert = certify_clearing(rec.models, main_opt.allocation, domain);
        double all_bundles = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
            const Bundle x(m, mask);
            all_bundles = std::max(all_bundles, std::abs(price_of(rec.models, i, x) - v(i, x)));
          }
        }
        br.clearing_delta = cert.delta;
        br.delta1_all = all_bundles;
        br.clearing_bound = static_cast<double>(n) * (all_bundles + br.delta1);
      }
    }
    out.push_back(br);
  }
  return out;
}

void write_bound_csv(const std::vector<BoundRecord>& records, std::ostream& os) {
  os << "round,economy,delta1,delta2,eff_loss,bound,slack,clearing_delta\n";
  os << std::setprecision(12);
  for (const auto& r : records) {
    os << r.round << "," << r.economy << "," << r.delta1 << "," << r.delta2 << "," << r.eff_loss << "," << r.bound
       << "," << r.slack << ",";
    if (r.clearing_delta) os << *r.clearing_delta;
    os << "\n";
  }
}

}  // namespace mlca
