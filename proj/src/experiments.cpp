#include "mlca/experiments.hpp"

#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "mlca/errors.hpp"
#include "mlca/rng.hpp"

namespace mlca {

namespace {

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << x;
  std::string s = os.str();
  return s == "-0.000000" ? "0.000000" : s;
}

double welfare_of(const DomainInstance& d, const Allocation& a) { return social_welfare(a, d.value_fn()); }

double optimal_welfare(const DomainInstance& d, std::uint64_t seed) {
  const auto opt = efficient_allocation(d.value_fn(), EconomyIndex::all(d.num_bidders()), d.num_items);
  if (!(opt.welfare > 0.0)) {
    throw DegenerateInstanceError("seed " + std::to_string(seed) + ": optimal welfare is not positive");
  }
  return opt.welfare;
}

// W(C) at true values for every coalition mask C.
std::vector<double> coalition_welfare(const DomainInstance& d) {
  const std::size_t n = d.num_bidders();
  std::vector<double> w(std::size_t{1} << n, 0.0);
  for (std::uint32_t c = 1; c < w.size(); ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if ((c >> i) & 1U) members.push_back(i);
    }
    w[c] = efficient_allocation(d.value_fn(), EconomyIndex(n, members), d.num_items).welfare;
  }
  return w;
}

double mean_learning_error(const ReportProfile& reports, const MlcaConfig& cfg, const DomainInstance& d,
                           std::uint64_t seed) {
  const auto sample = learning_error_sample(d.num_items, seed);
  double total = 0.0;
  for (std::size_t i = 0; i < d.num_bidders(); ++i) {
    const auto truth = std::make_shared<const Valuation>(d.bidders[i]);
    total += learning_error(train_model(cfg.learner_for(i), reports[i], truth), *truth, sample);
  }
  return total / static_cast<double>(d.num_bidders());
}

SeedResult run_one(const std::string& mechanism, const ExperimentConfig& cfg, std::uint64_t seed) {
  const DomainInstance d = generate_domain(cfg.domain.generator, seed, cfg.domain.num_items, cfg.domain.num_bidders);
  const std::size_t n = d.num_bidders();
  const double best = optimal_welfare(d, seed);
  SeedResult r;
  r.seed = seed;
  auto check = [&](const AuctionOutcome& o) {
    if (count_ir_deficit_violations(o) != 0) throw Error("individual rationality or no-deficit violated");
  };
  auto core_revenue = [&](const AuctionOutcome& o) {
    if (n > 8) return std::numeric_limits<double>::quiet_NaN();
    return vcg_nearest_payments(o.reports, o.allocation).total() / best;
  };
  if (mechanism == "mlca") {
    MlcaConfig c = cfg.mlca;
    c.seed = seed;
    c.payment_rule = cfg.payment_rule;
    const MlcaRun run = run_mlca(d, {}, c);
    check(run.outcome);
    r.efficiency = welfare_of(d, run.outcome.allocation) / best;
    r.revenue = run.outcome.payments.total() / best;
    r.revenue_core = core_revenue(run.outcome);
    r.rounds = run.outcome.rounds;
    r.learning_error = mean_learning_error(run.outcome.reports, c, d, seed);
    r.wd_solve_time = run.economies.empty() ? 0.0 : run.wdp_seconds / static_cast<double>(run.economies.size());
    r.optimality_gap = run.worst_gap;
  } else if (mechanism == "cca") {
    CcaConfig c = cfg.cca;
    c.seed = seed;
    c.payment_rule = cfg.payment_rule;
    const CcaRun run = run_cca(d, c);
    check(run.outcome);
    r.efficiency = welfare_of(d, run.outcome.allocation) / best;
    r.revenue = run.outcome.payments.total() / best;
    r.revenue_core = core_revenue(run.outcome);
    r.rounds = run.outcome.rounds;
  } else if (mechanism == "vcg") {
    const auto opt = efficient_allocation(d.value_fn(), EconomyIndex::all(n), d.num_items);
    std::vector<double> bids(n);
    std::vector<double> vcg(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) bids[i] = d.value(i, opt.allocation.bundles[i]);
    if (n > 1) {
      for (std::size_t i = 0; i < n; ++i) {
        const double without = efficient_allocation(d.value_fn(), EconomyIndex::without(n, i), d.num_items).welfare;
        vcg[i] = std::max(0.0, without - (best - bids[i]));
      }
    }
    double total = 0.0;
    for (double p : vcg) total += p;
    r.efficiency = 1.0;
    r.revenue = total / best;
    r.revenue_core = n > 8 ? std::numeric_limits<double>::quiet_NaN()
                           : (n > 1 ? nearest_core_point(coalition_welfare(d), bids, vcg).total() : total) / best;
  } else if (mechanism == "random") {
    r.efficiency = welfare_of(d, random_allocation(d.num_items, n, seed)) / best;
  } else {
    throw ParameterError("unknown mechanism '" + mechanism + "'");
  }
  return r;
}

}  // namespace

std::vector<std::uint64_t> ExperimentConfig::seeds() const {
  std::vector<std::uint64_t> out;
  for (std::uint64_t s = first_seed; s <= last_seed; ++s) {
    out.push_back(s);
    if (s == std::numeric_limits<std::uint64_t>::max()) break;
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (first_seed > last_seed) throw ParameterError("seed range is empty");
  if (domain.num_items == 0 || domain.num_bidders == 0) throw ParameterError("domain needs items and bidders");
  mlca.validate(domain.num_bidders);
  for (const auto& m : mechanisms) {
    if (m != "mlca" && m != "cca" && m != "vcg" && m != "random") {
      throw ParameterError("unknown mechanism '" + m + "'");
    }
  }
}

void parse_seed_range(const std::string& text, std::uint64_t& first, std::uint64_t& last) {
  const auto dots = text.find("..");
  try {
    std::size_t used = 0;
    if (dots == std::string::npos) {
      first = last = std::stoull(text, &used);
      if (used != text.size()) throw ParameterError("bad seed '" + text + "'");
    } else {
      const std::string a = text.substr(0, dots);
      const std::string b = text.substr(dots + 2);
      first = std::stoull(a, &used);
      if (used != a.size()) throw ParameterError("bad seed range '" + text + "'");
      last = std::stoull(b, &used);
      if (used != b.size()) throw ParameterError("bad seed range '" + text + "'");
    }
  } catch (const std::logic_error&) {
    throw ParameterError("bad seed range '" + text + "'");
  }
  if (first > last) throw ParameterError("seed range '" + text + "' is empty");
}

Stat summarize(const std::vector<double>& samples) {
  Stat s;
  if (samples.empty()) return s;
  const double k = static_cast<double>(samples.size());
  for (double x : samples) s.mean += x;
  s.mean /= k;
  if (samples.size() > 1) {
    double ss = 0.0;
    for (double x : samples) ss += (x - s.mean) * (x - s.mean);
    s.std_err = std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
  }
  return s;
}

int count_ir_deficit_violations(const AuctionOutcome& outcome, double tolerance) {
  int violations = 0;
  for (std::size_t i = 0; i < outcome.payments.amounts.size(); ++i) {
    const double p = outcome.payments.amounts[i];
    const double bid = outcome.reports[i].value_or_throw(outcome.allocation.bundles[i]);
    if (p < -tolerance) ++violations;
    if (p > bid + tolerance) ++violations;
  }
  return violations;
}

Allocation random_allocation(std::size_t num_items, std::size_t num_bidders, std::uint64_t seed) {
  Rng rng(seed, "random-allocation");
  Allocation a = Allocation::empty(num_bidders, num_items);
  for (std::size_t j = 0; j < num_items; ++j) {
    const auto owner = static_cast<std::size_t>(rng.below(num_bidders + 1));
    if (owner < num_bidders) a.bundles[owner] = a.bundles[owner].with(j);
  }
  return a;
}

std::vector<ResultRow> run_batch(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ResultRow> rows;
  for (const std::string& mech : cfg.mechanisms) {
    ResultRow row;
    row.mechanism = mech;
    row.ml = mech == "mlca" ? cfg.mlca.learner.describe() : "-";
    row.heuristic = mech == "cca" ? heuristic_name(cfg.cca.heuristic) : "-";
    row.payment = (mech == "mlca" || mech == "cca") ? payment_rule_name(cfg.payment_rule)
                                                    : (mech == "vcg" ? "vcg" : "-");
    for (std::uint64_t seed : cfg.seeds()) {
      try {
        row.per_seed.push_back(run_one(mech, cfg, seed));
      } catch (const std::exception& e) {
        throw Error(mech + " failed on seed " + std::to_string(seed) + ": " + e.what());
      }
    }
    auto column = [&](double SeedResult::*field) {
      std::vector<double> v;
      for (const auto& s : row.per_seed) v.push_back(s.*field);
      return summarize(v);
    };
    row.efficiency = column(&SeedResult::efficiency);
    row.revenue = column(&SeedResult::revenue);
    row.revenue_core = column(&SeedResult::revenue_core);
    row.rounds = column(&SeedResult::rounds);
    row.learning_error = column(&SeedResult::learning_error);
    row.wd_solve_time = column(&SeedResult::wd_solve_time);
    row.optimality_gap = column(&SeedResult::optimality_gap);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& os, bool include_timing) {
  os << "mechanism,ml,heuristic,payment,seeds,efficiency,efficiency_se,revenue,revenue_se,revenue_core,"
        "revenue_core_se,rounds,rounds_se,learning_error,learning_error_se,optimality_gap";
  if (include_timing) os << ",wd_solve_time,wd_solve_time_se";
  os << "\n";
  for (const auto& r : rows) {
    os << r.mechanism << "," << r.ml << "," << r.heuristic << "," << r.payment << "," << r.per_seed.size() << ","
       << fmt(r.efficiency.mean) << "," << fmt(r.efficiency.std_err) << "," << fmt(r.revenue.mean) << ","
       << fmt(r.revenue.std_err) << "," << fmt(r.revenue_core.mean) << "," << fmt(r.revenue_core.std_err) << ","
       << fmt(r.rounds.mean) << "," << fmt(r.rounds.std_err) << "," << fmt(r.learning_error.mean) << ","
       << fmt(r.learning_error.std_err) << "," << fmt(r.optimality_gap.mean);
    if (include_timing) os << "," << fmt(r.wd_solve_time.mean) << "," << fmt(r.wd_solve_time.std_err);
    os << "\n";
  }
}

void write_seed_csv(const std::vector<ResultRow>& rows, std::ostream& os, bool include_timing) {
  os << "mechanism,seed,efficiency,revenue,revenue_core,rounds,learning_error,optimality_gap";
  if (include_timing) os << ",wd_solve_time";
  os << "\n";
  for (const auto& r : rows) {
    for (const auto& s : r.per_seed) {
      os << r.mechanism << "," << s.seed << "," << fmt(s.efficiency) << "," << fmt(s.revenue) << ","
         << fmt(s.revenue_core) << "," << fmt(s.rounds) << "," << fmt(s.learning_error) << ","
         << fmt(s.optimality_gap);
      if (include_timing) os << "," << fmt(s.wd_solve_time);
      os << "\n";
    }
  }
}

std::vector<GridRow> kernel_grid(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t m = cfg.domain.num_items;
  const double half = static_cast<double>(m) / 2.0;
  const std::vector<KernelSpec> kernels =
      cfg.kernels.empty() ? std::vector<KernelSpec>{KernelSpec::linear(), KernelSpec::quadratic(0.1),
                                                    KernelSpec::exponential(half), KernelSpec::gaussian(half)}
                          : cfg.kernels;
  const std::vector<double> epsilons = cfg.epsilons.empty() ? std::vector<double>{0.0, 0.5, 2.0} : cfg.epsilons;
  for (const auto& k : kernels) k.validate();

  struct Cell {
    std::vector<double> eff, err, time, gap, sv;
  };
  std::vector<Cell> cells(kernels.size() * epsilons.size() * cfg.sample_sizes.size());

  for (std::uint64_t seed : cfg.seeds()) {
    const DomainInstance d = generate_domain(cfg.domain.generator, seed, m, cfg.domain.num_bidders);
    const std::size_t n = d.num_bidders();
    const double best = optimal_welfare(d, seed);
    const auto sample = learning_error_sample(m, seed);
    for (std::size_t qi = 0; qi < cfg.sample_sizes.size(); ++qi) {
      const int q = cfg.sample_sizes[qi];
      if (q <= 0 || (m < 64 && static_cast<std::uint64_t>(q) > full_mask(m))) {
        throw DomainTooSmallError("grid sample size " + std::to_string(q) + " does not fit the domain");
      }
      ReportProfile reports;
      for (std::size_t i = 0; i < n; ++i) {
        Rng rng(seed, "grid-sample-" + std::to_string(i) + "-" + std::to_string(q));
        ReportSet rs(m);
        for (const Bundle& b : sample_nonempty_bundles(m, static_cast<std::size_t>(q), {}, rng)) {
          rs.add(b, d.value(i, b));
        }
        reports.push_back(std::move(rs));
      }
      for (std::size_t ki = 0; ki < kernels.size(); ++ki) {
        for (std::size_t ei = 0; ei < epsilons.size(); ++ei) {
          Cell& cell = cells[(ki * epsilons.size() + ei) * cfg.sample_sizes.size() + qi];
          WdpProblem p;
          p.num_items = m;
          p.economy = EconomyIndex::all(n);
          p.time_limit = cfg.mlca.wdp_time_limit;
          double err = 0.0;
          double svs = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            auto model =
                std::make_shared<const LearnedValuation>(train_svr(reports[i], kernels[ki], epsilons[ei], cfg.mlca.learner.c));
            err += learning_error(*model, d.bidders[i], sample);
            svs += static_cast<double>(model_size(*model));
            p.models.push_back(model);
          }
          const WdpSolution sol = solve(p);
          cell.eff.push_back(welfare_of(d, sol.allocation) / best);
          cell.err.push_back(err / static_cast<double>(n));
          cell.sv.push_back(svs / static_cast<double>(n));
          cell.time.push_back(sol.seconds);
          cell.gap.push_back(sol.status == WdpStatus::kOptimal ? 0.0 : sol.gap());
        }
      }
    }
  }

  std::vector<GridRow> rows;
  for (std::size_t ki = 0; ki < kernels.size(); ++ki) {
    for (std::size_t ei = 0; ei < epsilons.size(); ++ei) {
      for (std::size_t qi = 0; qi < cfg.sample_sizes.size(); ++qi) {
        const Cell& cell = cells[(ki * epsilons.size() + ei) * cfg.sample_sizes.size() + qi];
        GridRow row;
        row.kernel = kernels[ki];
        row.epsilon = epsilons[ei];
        row.sample_size = cfg.sample_sizes[qi];
        row.efficiency = summarize(cell.eff);
        row.learning_error = summarize(cell.err);
        row.wd_solve_time = summarize(cell.time);
        row.optimality_gap = summarize(cell.gap);
        row.support_vectors = summarize(cell.sv);
        rows.push_back(row);
      }
    }
  }
  return rows;
}

void write_grid_csv(const std::vector<GridRow>& rows, std::ostream& os, bool include_timing) {
  os << "kernel,lambda,epsilon,q,efficiency,efficiency_se,learning_error,learning_error_se,optimality_gap,"
        "support_vectors";
  if (include_timing) os << ",wd_solve_time,wd_solve_time_se";
  os << "\n";
  for (const auto& r : rows) {
    os << kernel_name(r.kernel.kind) << "," << fmt(r.kernel.lambda) << "," << fmt(r.epsilon) << "," << r.sample_size
       << "," << fmt(r.efficiency.mean) << "," << fmt(r.efficiency.std_err) << "," << fmt(r.learning_error.mean)
       << "," << fmt(r.learning_error.std_err) << "," << fmt(r.optimality_gap.mean) << ","
       << fmt(r.support_vectors.mean);
    if (include_timing) os << "," << fmt(r.wd_solve_time.mean) << "," << fmt(r.wd_solve_time.std_err);
    os << "\n";
  }
}

double anova_p_value(const std::vector<std::vector<double>>& groups) {
  std::size_t total = 0;
  double grand = 0.0;
  for (const auto& g : groups) {
    total += g.size();
    for (double x : g) grand += x;
  }
  const std::size_t k = groups.size();
  if (k < 2 || total <= k) throw ParameterError("ANOVA needs at least two groups and more observations than groups");
  grand /= static_cast<double>(total);
  double between = 0.0;
  double within = 0.0;
  for (const auto& g : groups) {
    if (g.empty()) throw ParameterError("ANOVA group is empty");
    double mean = 0.0;
    for (double x : g) mean += x;
    mean /= static_cast<double>(g.size());
    between += static_cast<double>(g.size()) * (mean - grand) * (mean - grand);
    for (double x : g) within += (x - mean) * (x - mean);
  }
  const double scale = std::max(1.0, std::abs(grand));
  if (between <= 1e-24 * scale * scale) return 1.0;
  if (within <= 0.0) return 0.0;
  const double d1 = static_cast<double>(k - 1);
  const double d2 = static_cast<double>(total - k);
  const double f = (between / d1) / (within / d2);
  return boost::math::cdf(boost::math::complement(boost::math::fisher_f(d1, d2), f));
}

std::size_t parse_role(const std::string& role, std::size_t num_bidders) {
  if (num_bidders == 0) throw ParameterError("no bidders");
  if (role == "national") return num_bidders - 1;
  if (role == "regional") return 0;
  try {
    std::size_t used = 0;
    const auto i = std::stoull(role, &used);
    if (used == role.size() && i < num_bidders) return static_cast<std::size_t>(i);
  } catch (const std::logic_error&) {
  }
  throw ParameterError("unknown role '" + role + "'");
}

ManipulationTable manipulation_study(const ExperimentConfig& cfg, std::size_t manipulator,
                                     const std::vector<double>& z_values) {
  cfg.validate();
  const std::size_t n = cfg.domain.num_bidders;
  if (manipulator >= n) throw ParameterError("manipulator index out of range");
  std::vector<BidderStrategy> strategies{BidderStrategy::truthful()};
  std::vector<std::string> names{"truthful"};
  for (double z : z_values) {
    strategies.push_back(BidderStrategy::overbid(z));
    names.push_back("overbid(" + fmt(z) + ")");
  }

  ManipulationTable table;
  table.manipulator = manipulator;
  table.rows.resize(strategies.size());
  for (std::size_t s = 0; s < strategies.size(); ++s) table.rows[s].strategy = names[s];

  for (std::uint64_t seed : cfg.seeds()) {
    const DomainInstance d = generate_domain(cfg.domain.generator, seed, cfg.domain.num_items, n);
    const double best = optimal_welfare(d, seed);
    MlcaConfig c = cfg.mlca;
    c.seed = seed;
    c.payment_rule = cfg.payment_rule;
    for (std::size_t s = 0; s < strategies.size(); ++s) {
      std::vector<BidderStrategy> profile(n, BidderStrategy::truthful());
      profile[manipulator] = strategies[s];
      const MlcaRun run = run_mlca(d, profile, c);
      if (count_ir_deficit_violations(run.outcome) != 0) {
        throw Error("seed " + std::to_string(seed) + ": individual rationality or no-deficit violated");
      }
      ManipulationRow& row = table.rows[s];
      row.efficiency_samples.push_back(welfare_of(d, run.outcome.allocation) / best);
      double marginal = 0.0;
      if (n > 1) {
        const EconomyIndex economy = EconomyIndex::without(n, manipulator);
        marginal = welfare_of(d, wdp_over_reports(run.outcome.reports, economy));
      }
      row.marginal_samples.push_back(marginal);
      row.utility_samples.push_back(utility(manipulator, run.outcome.allocation, run.outcome.payments, d.value_fn()));
      if (run.won_misreported_bundle[manipulator]) ++row.misreported_wins;
    }
  }
  std::vector<std::vector<double>> eff, marg, util;
  for (auto& row : table.rows) {
    row.efficiency = summarize(row.efficiency_samples);
    row.marginal_welfare = summarize(row.marginal_samples);
    row.utility = summarize(row.utility_samples);
    eff.push_back(row.efficiency_samples);
    marg.push_back(row.marginal_samples);
    util.push_back(row.utility_samples);
  }
  if (table.rows.size() >= 2 && cfg.seeds().size() >= 2) {
    table.p_efficiency = anova_p_value(eff);
    table.p_marginal = anova_p_value(marg);
    table.p_utility = anova_p_value(util);
  }
  return table;
}

void write_manipulation_csv(const ManipulationTable& table, std::ostream& os) {
  os << "strategy,efficiency,efficiency_se,marginal_welfare,marginal_welfare_se,utility,utility_se,misreported_wins\n";
  for (const auto& r : table.rows) {
    os << r.strategy << "," << fmt(r.efficiency.mean) << "," << fmt(r.efficiency.std_err) << ","
       << fmt(r.marginal_welfare.mean) << "," << fmt(r.marginal_welfare.std_err) << "," << fmt(r.utility.mean) << ","
       << fmt(r.utility.std_err) << "," << r.misreported_wins << "\n";
  }
  os << "anova_p," << fmt(table.p_efficiency) << ",," << fmt(table.p_marginal) << ",," << fmt(table.p_utility)
     << ",,\n";
}

}  // namespace mlca
