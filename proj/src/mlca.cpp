#include "mlca/mlca.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "mlca/errors.hpp"
#include "mlca/rng.hpp"

namespace mlca {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::vector<Bundle> sample_nonempty_bundles(std::size_t m, std::size_t count,
                                            const std::unordered_set<std::uint64_t>& taken, Rng& rng) {
  const std::uint64_t nonempty = full_mask(m);
  std::vector<Bundle> out;
  std::unordered_set<std::uint64_t> used(taken);
  if (m <= 20 && count * 2 > nonempty) {
    std::vector<std::uint64_t> pool;
    for (std::uint64_t mask = 1; mask <= nonempty; ++mask) {
      if (used.count(mask) == 0) pool.push_back(mask);
    }
    rng.shuffle(pool);
    for (std::size_t k = 0; k < count; ++k) out.emplace_back(m, pool[k]);
    return out;
  }
  while (out.size() < count) {
    const std::uint64_t mask = rng.below(nonempty) + 1;
    if (used.insert(mask).second) out.emplace_back(m, mask);
  }
  return out;
}

int MlcaConfig::rounds() const { return q_round > 0 && q_max > q_init ? (q_max - q_init) / q_round : 0; }

const LearnerSpec& MlcaConfig::learner_for(std::size_t bidder) const {
  return learners.empty() ? learner : learners.at(bidder);
}

void MlcaConfig::validate(std::size_t num_bidders) const {
  if (q_init < 0 || q_max < 0) throw ParameterError("query counts must be nonnegative");
  if (q_init > q_max) throw ParameterError("Q_init must not exceed Q_max");
  if (q_round < 1) throw ParameterError("Q_round must be at least 1");
  if (p_max < 0) throw ParameterError("P_max must be nonnegative");
  if (!(wdp_time_limit >= 0.0)) throw ParameterError("WDP time limit must be nonnegative");
  if (!learners.empty() && learners.size() != num_bidders) throw ParameterError("one learner per bidder expected");
  if (!initial_queries.empty()) {
    if (initial_queries.size() != num_bidders) throw ParameterError("one initial query list per bidder expected");
    for (const auto& list : initial_queries) {
      if (!list.empty() && list.size() != static_cast<std::size_t>(q_init)) {
        throw ParameterError("injected initial queries must number Q_init");
      }
    }
  }
}

std::vector<std::shared_ptr<const LearnedValuation>> train_models(
    const ReportProfile& reports, const MlcaConfig& cfg, const std::vector<std::shared_ptr<const Valuation>>& truths) {
  std::vector<std::shared_ptr<const LearnedValuation>> out;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const std::shared_ptr<const Valuation> truth = i < truths.size() ? truths[i] : nullptr;
    out.push_back(std::make_shared<const LearnedValuation>(train_model(cfg.learner_for(i), reports[i], truth)));
  }
  return out;
}

QueryProfile next_queries(const EconomyIndex& economy, const ReportProfile& reports,
                          const std::vector<std::vector<Bundle>>& generated,
                          const std::vector<std::shared_ptr<const LearnedValuation>>& models,
                          const QueryOptions& options, EconomyRecord* record) {
  const std::size_t n = economy.num_bidders();
  if (reports.size() != n || models.size() != n) throw DimensionError("profile sizes do not match the economy");
  if (!generated.empty() && generated.size() != n) throw DimensionError("one generated-bundle list per bidder expected");
  const std::size_t m = reports.front().num_items();
  const auto start = Clock::now();

  WdpProblem base;
  base.num_items = m;
  base.models = models;
  base.economy = economy;
  base.time_limit = options.time_limit;
  const WdpSolution main = solve(base);
  if (main.status == WdpStatus::kInfeasible) throw Error("query module found no feasible allocation");

  QueryProfile q;
  q.economy = economy;
  q.bundles = main.allocation.bundles;
  q.asked.assign(n, false);
  q.provenance.assign(n, "");
  double worst_gap = main.status == WdpStatus::kOptimal ? 0.0 : main.gap();
  WdpStatus worst_status = main.status;

  for (std::size_t i : economy.members()) {
    q.asked[i] = true;
    q.provenance[i] = economy.tag();
    std::unordered_set<std::uint64_t> seen{0};
    std::vector<Bundle> excluded{Bundle(m)};
    auto exclude = [&](const Bundle& b) {
      if (seen.insert(b.mask()).second) excluded.push_back(b);
    };
    for (const auto& r : reports[i].reports()) exclude(r.bundle);
    if (!generated.empty()) {
      for (const Bundle& b : generated[i]) exclude(b);
    }
    if (seen.count(q.bundles[i].mask()) == 0) continue;

    if (m < 64 && excluded.size() >= (std::size_t{1} << m)) {
      if (!options.skip_exhausted) {
        throw ExhaustedBidderError("bidder " + std::to_string(i) + " has been asked every bundle");
      }
      q.bundles[i] = Bundle(m);
      q.asked[i] = false;
      continue;
    }
    WdpProblem restricted = base;
    restricted.exclusions.assign(n, {});
    restricted.exclusions[i] = std::move(excluded);
    const WdpSolution alt = solve(restricted);
    if (alt.status == WdpStatus::kInfeasible) {
      throw ExhaustedBidderError("no new bundle found for bidder " + std::to_string(i));
    }
    if (alt.status != WdpStatus::kOptimal) {
      worst_status = alt.status;
      worst_gap = std::max(worst_gap, alt.gap());
    }
    q.bundles[i] = alt.allocation.bundles[i];
  }

  if (record != nullptr) {
    record->economy = economy;
    record->models = models;
    record->learned_optimum = main.allocation;
    record->learned_objective = main.objective;
    record->status = worst_status;
    record->gap = worst_gap;
    record->seconds = seconds_since(start);
    record->queries = q;
  }
  return q;
}

QueryProfile next_queries(const EconomyIndex& economy, const ReportProfile& reports,
                          const std::vector<std::vector<Bundle>>& generated, const MlcaConfig& cfg,
                          const std::vector<std::shared_ptr<const Valuation>>& truths) {
  QueryOptions options;
  options.time_limit = cfg.wdp_time_limit;
  return next_queries(economy, reports, generated, train_models(reports, cfg, truths), options);
}

double best_elicited_welfare(const ReportProfile& reports, const DomainInstance& domain) {
  ReportProfile truthful;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    ReportSet rs(domain.num_items);
    for (const auto& r : reports[i].reports()) rs.add(r.bundle, domain.value(i, r.bundle));
    truthful.push_back(std::move(rs));
  }
  const EconomyIndex all = EconomyIndex::all(reports.size());
  return reported_welfare(wdp_over_reports(truthful, all), truthful, all);
}

std::vector<double> others_welfare_table(const DomainInstance& domain, std::size_t bidder) {
  const std::size_t m = domain.num_items;
  if (m > 18) throw CapabilityError("welfare table limited to 18 items");
  const std::size_t states = std::size_t{1} << m;
  std::vector<double> best(states, 0.0);
  std::vector<double> values(states);
  std::vector<double> next(states);
  for (std::size_t k = 0; k < domain.num_bidders(); ++k) {
    if (k == bidder) continue;
    for (std::uint64_t mask = 0; mask < states; ++mask) values[mask] = domain.value(k, Bundle(m, mask));
    for (std::uint64_t free = 0; free < states; ++free) {
      double b = -std::numeric_limits<double>::infinity();
      for (std::uint64_t sub = free;; sub = (sub - 1) & free) {
        b = std::max(b, values[sub] + best[free ^ sub]);
        if (sub == 0) break;
      }
      next[free] = b;
    }
    best.swap(next);
  }
  return best;
}

MlcaRun run_mlca(const DomainInstance& domain, const std::vector<BidderStrategy>& strategies, const MlcaConfig& cfg,
                 const std::vector<std::vector<BundleValueReport>>& push_bids) {
  const std::size_t n = domain.num_bidders();
  const std::size_t m = domain.num_items;
  if (n == 0) throw ParameterError("auction needs at least one bidder");
  cfg.validate(n);
  if (!strategies.empty() && strategies.size() != n) throw ParameterError("one strategy per bidder expected");
  if (push_bids.size() > n) throw ParameterError("push bids given for unknown bidders");

  std::vector<std::shared_ptr<const Valuation>> truths;
  for (const auto& v : domain.bidders) truths.push_back(std::make_shared<const Valuation>(v));
  auto strategy = [&](std::size_t i) { return strategies.empty() ? BidderStrategy::truthful() : strategies[i]; };

  MlcaRun run;
  ReportProfile reports(n, ReportSet(m));
  std::vector<int> asked_count(n, 0);

  for (std::size_t i = 0; i < push_bids.size(); ++i) {
    if (push_bids[i].size() > static_cast<std::size_t>(cfg.p_max)) {
      throw ParameterError("bidder " + std::to_string(i) + " exceeds the push-bid cap");
    }
    for (const auto& pb : push_bids[i]) reports[i].add(pb.bundle, pb.value);
  }

  std::vector<std::vector<double>> others_best(n);
  bool any_manipulator = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (strategy(i).needs_oracle()) {
      others_best[i] = others_welfare_table(domain, i);
      any_manipulator = true;
    }
  }
  const std::uint64_t full = full_mask(m);
  auto answer = [&](std::size_t i, const Bundle& b, double v_r) {
    const BidderStrategy s = strategy(i);
    if (!s.needs_oracle()) return answer_query(s, domain.bidders[i], b, 0.0, 0.0);
    const double v_t = domain.value(i, b) + others_best[i][full ^ b.mask()];
    return answer_query(s, domain.bidders[i], b, v_r, v_t);
  };
  auto record_welfare = [&] {
    const EconomyIndex all = EconomyIndex::all(n);
    run.reported_welfare.push_back(reported_welfare(wdp_over_reports(reports, all), reports, all));
  };

  // Initialization: Q_init random nonempty bundles per bidder.
  {
    const auto start = Clock::now();
    RoundRecord rec;
    rec.round = 0;
    rec.queries.resize(n);
    rec.answers.resize(n);
    const double v_r = any_manipulator ? best_elicited_welfare(reports, domain) : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool injected = !cfg.initial_queries.empty() && !cfg.initial_queries[i].empty();
      std::unordered_set<std::uint64_t> taken;
      for (const auto& r : reports[i].reports()) taken.insert(r.bundle.mask());
      const auto q_init = static_cast<std::size_t>(cfg.q_init);
      if (m < 64 && q_init + taken.size() > full) {
        throw DomainTooSmallError("Q_init exceeds the number of fresh nonempty bundles");
      }
      Rng rng(cfg.seed, "mlca-initial-" + std::to_string(i));
      const std::vector<Bundle> bundles =
          injected ? cfg.initial_queries[i] : sample_nonempty_bundles(m, q_init, taken, rng);
      for (const Bundle& b : bundles) {
        const double value = answer(i, b, v_r);
        rec.queries[i].push_back(b);
        rec.answers[i].push_back(value);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < rec.queries[i].size(); ++k) reports[i].add(rec.queries[i][k], rec.answers[i][k]);
      asked_count[i] += static_cast<int>(rec.queries[i].size());
    }
    rec.seconds = seconds_since(start);
    run.outcome.trace.push_back(std::move(rec));
    record_welfare();
  }

  Rng delivery(cfg.seed, "mlca-delivery");
  Rng sampler(cfg.seed, "mlca-marginal-sampling");
  QueryOptions options;
  options.time_limit = cfg.wdp_time_limit;
  options.skip_exhausted = true;
  const int rounds = cfg.rounds();

  for (int t = 1; t <= rounds; ++t) {
    const auto start = Clock::now();
    const auto models = train_models(reports, cfg, truths);
    std::vector<std::vector<Bundle>> queued(n);

    auto query_economy = [&](const EconomyIndex& economy) {
      EconomyRecord rec;
      rec.round = t;
      QueryProfile q = next_queries(economy, reports, queued, models, options, &rec);
      run.wdp_seconds += rec.seconds;
      run.worst_gap = std::max(run.worst_gap, rec.gap);
      run.economies.push_back(std::move(rec));
      return q;
    };
    auto take = [&](const QueryProfile& q, std::size_t i) {
      if (q.asked[i]) queued[i].push_back(q.bundles[i]);
    };
    // Per bidder i: `count` marginal economies N∖{j}, j ≠ i, sampled without
    // replacement; only bidder i's query is kept.
    auto sampled_marginals = [&](std::size_t count) {
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> others;
        for (std::size_t j = 0; j < n; ++j) {
          if (j != i) others.push_back(j);
        }
        sampler.shuffle(others);
        others.resize(std::min(count, others.size()));
        for (std::size_t j : others) take(query_economy(EconomyIndex::without(n, j)), i);
      }
    };

    const auto q_round = static_cast<std::size_t>(cfg.q_round);
    if (q_round >= n) {
      for (std::size_t rep = 0; rep < q_round / n; ++rep) {
        if (n > 1) {
          for (std::size_t j = 0; j < n; ++j) {
            const QueryProfile q = query_economy(EconomyIndex::without(n, j));
            for (std::size_t i = 0; i < n; ++i) {
              if (i != j) take(q, i);
            }
          }
        }
        const QueryProfile q = query_economy(EconomyIndex::all(n));
        for (std::size_t i = 0; i < n; ++i) take(q, i);
      }
      if (q_round % n != 0) sampled_marginals(q_round % n);
    } else {
      sampled_marginals(q_round - 1);
      const QueryProfile q = query_economy(EconomyIndex::all(n));
      for (std::size_t i = 0; i < n; ++i) take(q, i);
    }

    RoundRecord rec;
    rec.round = t;
    rec.queries.resize(n);
    rec.answers.resize(n);
    const double v_r = any_manipulator ? best_elicited_welfare(reports, domain) : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      delivery.shuffle(queued[i]);
      for (const Bundle& b : queued[i]) {
        rec.queries[i].push_back(b);
        rec.answers[i].push_back(answer(i, b, v_r));
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < rec.queries[i].size(); ++k) reports[i].add(rec.queries[i][k], rec.answers[i][k]);
      asked_count[i] += static_cast<int>(rec.queries[i].size());
      if (asked_count[i] > cfg.q_max) throw Error("query cap exceeded for bidder " + std::to_string(i));
    }
    rec.seconds = seconds_since(start);
    run.outcome.trace.push_back(std::move(rec));
    record_welfare();
  }

  const EconomyIndex all = EconomyIndex::all(n);
  run.outcome.allocation = wdp_over_reports(reports, all);
  run.outcome.payments = compute_payments(cfg.payment_rule, reports, run.outcome.allocation);
  run.outcome.rounds = rounds;
  run.won_misreported_bundle.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const Bundle& b = run.outcome.allocation.bundles[i];
    if (b.empty()) continue;
    run.won_misreported_bundle[i] = std::abs(reports[i].value_or_throw(b) - domain.value(i, b)) > kWelfareTolerance;
  }
  run.outcome.reports = std::move(reports);
  return run;
}

SwaReport swa_diagnostic(const MlcaRun& run, const DomainInstance& domain, const MlcaConfig& cfg) {
  const std::size_t n = domain.num_bidders();
  const MlcaRun truthful = run_mlca(domain, {}, cfg);
  auto marginal = [&](const ReportProfile& reports, std::size_t i) {
    if (n == 1) return 0.0;
    const EconomyIndex economy = EconomyIndex::without(n, i);
    return reported_welfare(wdp_over_reports(reports, economy), reports, economy);
  };
  SwaReport out;
  for (std::size_t i = 0; i < n; ++i) {
    out.manipulated.push_back(marginal(run.outcome.reports, i));
    out.truthful.push_back(marginal(truthful.outcome.reports, i));
    out.delta.push_back(out.manipulated.back() - out.truthful.back());
  }
  return out;
}

}  // namespace mlca
