#include "mlca/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mlca/errors.hpp"

namespace mlca {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

Allocation Allocation::empty(std::size_t num_bidders, std::size_t num_items) {
  return Allocation{std::vector<Bundle>(num_bidders, Bundle(num_items))};
}

bool lex_less(const Allocation& a, const Allocation& b) {
  const std::size_t n = std::min(a.bundles.size(), b.bundles.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a.bundles[i] == b.bundles[i]) continue;
    return lex_less(a.bundles[i], b.bundles[i]);
  }
  return a.bundles.size() < b.bundles.size();
}

// --- ReportSet --------------------------------------------------------------

void ReportSet::add(const Bundle& bundle, double value) {
  check_width(bundle, num_items_);
  if (!std::isfinite(value) || value < 0.0) {
    throw ParameterError("reported value must be finite and nonnegative");
  }
  if (bundle.empty()) {
    throw ParameterError("the empty bundle is implicitly reported at value 0");
  }
  if (index_.count(bundle.mask()) != 0) {
    throw ParameterError("duplicate report for bundle " + bundle.to_string());
  }
  index_.emplace(bundle.mask(), reports_.size());
  reports_.push_back({bundle, value});
}

bool ReportSet::contains(const Bundle& bundle) const {
  return bundle.empty() || index_.count(bundle.mask()) != 0;
}

std::optional<double> ReportSet::value(const Bundle& bundle) const {
  check_width(bundle, num_items_);
  if (bundle.empty()) return 0.0;
  auto it = index_.find(bundle.mask());
  if (it == index_.end()) return std::nullopt;
  return reports_[it->second].value;
}

double ReportSet::value_or_throw(const Bundle& bundle) const {
  auto v = value(bundle);
  if (!v) throw UndefinedReportError("bundle " + bundle.to_string() + " was not reported");
  return *v;
}

double Payments::total() const { return std::accumulate(amounts.begin(), amounts.end(), 0.0); }

// --- EconomyIndex -------------------------------------------------------------

EconomyIndex::EconomyIndex(std::size_t num_bidders, std::vector<std::size_t> members)
    : num_bidders_(num_bidders), members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  if (members_.empty()) throw ParameterError("economy must contain at least one bidder");
  if (members_.back() >= num_bidders) throw ParameterError("economy member out of range");
}

EconomyIndex EconomyIndex::all(std::size_t num_bidders) {
  std::vector<std::size_t> m(num_bidders);
  std::iota(m.begin(), m.end(), std::size_t{0});
  return EconomyIndex(num_bidders, std::move(m));
}

EconomyIndex EconomyIndex::without(std::size_t num_bidders, std::size_t excluded) {
  std::vector<std::size_t> m;
  for (std::size_t i = 0; i < num_bidders; ++i) {
    if (i != excluded) m.push_back(i);
  }
  return EconomyIndex(num_bidders, std::move(m));
}

bool EconomyIndex::contains(std::size_t bidder) const {
  return std::binary_search(members_.begin(), members_.end(), bidder);
}

std::string EconomyIndex::tag() const {
  if (members_.size() == num_bidders_) return "main";
  if (members_.size() + 1 == num_bidders_) {
    for (std::size_t i = 0; i < num_bidders_; ++i) {
      if (!contains(i)) return "marginal:" + std::to_string(i);
    }
  }
  std::string s = "economy:";
  for (std::size_t k = 0; k < members_.size(); ++k) {
    if (k) s += '+';
    s += std::to_string(members_[k]);
  }
  return s;
}

// --- basic operations ---------------------------------------------------------

bool feasible(const Allocation& a, std::size_t num_items) {
  std::uint64_t used = 0;
  bool ok = true;
  for (const Bundle& b : a.bundles) {
    check_width(b, num_items);
    if ((used & b.mask()) != 0) ok = false;
    used |= b.mask();
  }
  return ok;
}

double reported_welfare(const Allocation& a, const ReportProfile& reports, const EconomyIndex& economy) {
  double total = 0.0;
  for (std::size_t i : economy.members()) {
    total += reports.at(i).value_or_throw(a.bundles.at(i));
  }
  return total;
}

namespace {

// Memoized search over report combinations: best welfare obtainable by
// layers k.. given the items already used.
class ReportSearch {
 public:
  ReportSearch(const ReportProfile& reports, const EconomyIndex& economy) : economy_(economy) {
    for (std::size_t i : economy.members()) {
      std::vector<BundleValueReport> cands;
      cands.push_back({Bundle(reports[i].num_items()), 0.0});
      for (const auto& r : reports[i].reports()) cands.push_back(r);
      candidates_.push_back(std::move(cands));
    }
    memo_.resize(candidates_.size() + 1);
  }

  double best(std::size_t k, std::uint64_t used) {
    if (k == candidates_.size()) return 0.0;
    auto it = memo_[k].find(used);
    if (it != memo_[k].end()) return it->second;
    double best_value = kNegInf;
    for (const auto& c : candidates_[k]) {
      if ((c.bundle.mask() & used) != 0) continue;
      best_value = std::max(best_value, c.value + best(k + 1, used | c.bundle.mask()));
    }
    memo_[k].emplace(used, best_value);
    return best_value;
  }

  Allocation reconstruct(std::size_t num_bidders, std::size_t num_items) {
    Allocation a = Allocation::empty(num_bidders, num_items);
    std::uint64_t used = 0;
    for (std::size_t k = 0; k < candidates_.size(); ++k) {
      const double target = best(k, used);
      const BundleValueReport* chosen = nullptr;
      for (const auto& c : candidates_[k]) {
        if ((c.bundle.mask() & used) != 0) continue;
        if (c.value + best(k + 1, used | c.bundle.mask()) < target - kWelfareTolerance) continue;
        if (chosen == nullptr || lex_less(c.bundle, chosen->bundle)) chosen = &c;
      }
      a.bundles[economy_.members()[k]] = chosen->bundle;
      used |= chosen->bundle.mask();
    }
    return a;
  }

 private:
  const EconomyIndex& economy_;
  std::vector<std::vector<BundleValueReport>> candidates_;
  std::vector<std::unordered_map<std::uint64_t, double>> memo_;
};

}  // namespace

Allocation wdp_over_reports(const ReportProfile& reports, const EconomyIndex& economy) {
  if (reports.size() != economy.num_bidders()) {
    throw DimensionError("report profile size does not match economy");
  }
  const std::size_t m = reports.empty() ? 0 : reports.front().num_items();
  for (const auto& r : reports) {
    if (r.num_items() != m) throw DimensionError("report sets disagree on item count");
  }
  ReportSearch search(reports, economy);
  search.best(0, 0);
  return search.reconstruct(reports.size(), m);
}

Payments vcg_payments_on_reports(const ReportProfile& reports, const Allocation& final_allocation) {
  const std::size_t n = reports.size();
  Payments p{std::vector<double>(n, 0.0)};
  if (n <= 1) return p;
  const EconomyIndex everyone = EconomyIndex::all(n);
  for (std::size_t i = 0; i < n; ++i) {
    const EconomyIndex marginal = EconomyIndex::without(n, i);
    const Allocation without_i = wdp_over_reports(reports, marginal);
    const double others_without = reported_welfare(without_i, reports, marginal);
    const double others_with = reported_welfare(final_allocation, reports, marginal);
    double amount = others_without - others_with;
    // Both terms are maxima over the same sums; only rounding separates them.
    if (amount < 0.0 && amount > -kWelfareTolerance) amount = 0.0;
    p.amounts[i] = amount;
  }
  return p;
}

Payments vcg_payments_on_reports(const ReportProfile& reports) {
  return vcg_payments_on_reports(reports, wdp_over_reports(reports, EconomyIndex::all(reports.size())));
}

double utility(std::size_t bidder, const Allocation& a, const Payments& p, const BundleValueFn& values) {
  return values(bidder, a.bundles.at(bidder)) - p.amounts.at(bidder);
}

double social_welfare(const Allocation& a, const BundleValueFn& values) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.bundles.size(); ++i) {
    if (!a.bundles[i].empty()) total += values(i, a.bundles[i]);
  }
  return total;
}

double efficiency_against(const Allocation& a, const BundleValueFn& values, double optimal_welfare) {
  if (!(optimal_welfare > 0.0)) {
    throw DegenerateInstanceError("efficiency undefined: optimal welfare is zero");
  }
  return social_welfare(a, values) / optimal_welfare;
}

double efficiency(const Allocation& a, const BundleValueFn& values, std::size_t num_items) {
  const auto best = efficient_allocation(values, EconomyIndex::all(a.num_bidders()), num_items);
  return efficiency_against(a, values, best.welfare);
}

// --- dense oracle -------------------------------------------------------------

bool dense_oracle_supports(std::size_t layers, std::size_t num_items) {
  if (num_items > 18) return false;
  const double work = static_cast<double>(layers) * std::pow(3.0, static_cast<double>(num_items));
  return work <= 2e9;
}

DenseWelfareResult maximize_dense(const DenseWelfareProblem& problem) {
  const std::size_t m = problem.num_items;
  const std::size_t layers = problem.bidders.size();
  if (!dense_oracle_supports(layers, m)) {
    throw CapabilityError("exact enumeration unsupported for " + std::to_string(layers) + " bidders and " +
                          std::to_string(m) + " items");
  }
  const std::uint64_t full = full_mask(m);
  const std::size_t states = std::size_t{1} << m;
  auto allowed = [&](std::size_t k, std::uint64_t mask) {
    return problem.allowed[k].empty() || problem.allowed[k][mask] != 0;
  };

  // best[k][free] = optimum of layers k.. using only items in `free`.
  std::vector<std::vector<double>> best(layers + 1);
  best[layers].assign(states, 0.0);
  for (std::size_t k = layers; k-- > 0;) {
    best[k].assign(states, kNegInf);
    const auto& vals = problem.values[k];
    const auto& next = best[k + 1];
    const bool only_full = (k == 0);
    for (std::uint64_t free = only_full ? full : 0; free <= full; ++free) {
      double b = kNegInf;
      for (std::uint64_t sub = free;; sub = (sub - 1) & free) {
        if (allowed(k, sub)) {
          const double rest = next[free ^ sub];
          if (rest != kNegInf) b = std::max(b, vals[sub] + rest);
        }
        if (sub == 0) break;
      }
      best[k][free] = b;
      if (free == full) break;
    }
  }

  DenseWelfareResult result;
  result.allocation = Allocation::empty(problem.num_bidders, m);
  if (best[0][full] == kNegInf) return result;
  result.feasible = true;
  std::uint64_t free = full;
  double total = 0.0;
  for (std::size_t k = 0; k < layers; ++k) {
    const double target = best[k][free];
    bool found = false;
    std::uint64_t chosen = 0;
    for (std::uint64_t sub = free;; sub = (sub - 1) & free) {
      if (allowed(k, sub)) {
        const double rest = best[k + 1][free ^ sub];
        if (rest != kNegInf && problem.values[k][sub] + rest >= target - kWelfareTolerance) {
          if (!found || lex_less_mask(sub, chosen)) chosen = sub;
          found = true;
        }
      }
      if (sub == 0) break;
    }
    result.allocation.bundles[problem.bidders[k]] = Bundle(m, chosen);
    total += problem.values[k][chosen];
    free ^= chosen;
  }
  result.welfare = total;
  return result;
}

DenseWelfareProblem tabulate(const BundleValueFn& values, const EconomyIndex& economy, std::size_t num_items) {
  if (num_items > 18) throw CapabilityError("cannot tabulate values over more than 18 items");
  DenseWelfareProblem p;
  p.num_items = num_items;
  p.num_bidders = economy.num_bidders();
  p.bidders = economy.members();
  const std::size_t states = std::size_t{1} << num_items;
  for (std::size_t i : economy.members()) {
    std::vector<double> row(states);
    for (std::uint64_t mask = 0; mask < states; ++mask) {
      row[mask] = mask == 0 ? 0.0 : values(i, Bundle(num_items, mask));
    }
    p.values.push_back(std::move(row));
    p.allowed.emplace_back();
  }
  return p;
}

DenseWelfareResult efficient_allocation(const BundleValueFn& values, const EconomyIndex& economy,
                                        std::size_t num_items) {
  return maximize_dense(tabulate(values, economy, num_items));
}

}  // namespace mlca
