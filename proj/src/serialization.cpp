#include "mlca/serialization.hpp"

#include "mlca/errors.hpp"

namespace mlca {

namespace {

Json allocation_json(const Allocation& a) {
  Json out = Json::array();
  for (const Bundle& b : a.bundles) out.push_back(b.to_string());
  return out;
}

Allocation allocation_from_json(const Json& j) {
  Allocation a;
  for (const auto& b : j) a.bundles.push_back(bundle_from_json(b));
  return a;
}

Json economy_json(const EconomyIndex& e) { return {{"bidders", e.num_bidders()}, {"members", e.members()}}; }

EconomyIndex economy_from_json(const Json& j) {
  return EconomyIndex(j.at("bidders").get<std::size_t>(), j.at("members").get<std::vector<std::size_t>>());
}

}  // namespace

Json to_json(const Bundle& b) { return b.to_string(); }

Bundle bundle_from_json(const Json& j) { return Bundle::from_string(j.get<std::string>()); }

Json to_json(const ReportSet& r) {
  Json out = Json::array();
  for (const auto& rep : r.reports()) out.push_back({{"bundle", rep.bundle.to_string()}, {"value", rep.value}});
  return out;
}

ReportSet report_set_from_json(const Json& j, std::size_t num_items) {
  ReportSet r(num_items);
  for (const auto& rep : j) r.add(bundle_from_json(rep.at("bundle")), rep.at("value").get<double>());
  return r;
}

Json to_json(const Valuation& v) {
  if (const auto* g = std::get_if<GsvmBidder>(&v)) return {{"type", "gsvm"}, {"item_values", g->item_values}};
  if (const auto* t = std::get_if<TwoWiseBidder>(&v)) {
    return {{"type", "twowise"}, {"weights", t->weights}, {"pair_weights", t->pair_weights}};
  }
  const auto& tb = std::get<TableBidder>(v);
  return {{"type", "table"}, {"items", tb.items}, {"values", tb.values}};
}

Valuation valuation_from_json(const Json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "gsvm") return GsvmBidder{j.at("item_values").get<std::vector<double>>()};
  if (type == "twowise") {
    return TwoWiseBidder{j.at("weights").get<std::vector<double>>(),
                         j.at("pair_weights").get<std::vector<std::vector<double>>>()};
  }
  if (type == "table") {
    TableBidder tb;
    tb.items = j.at("items").get<std::size_t>();
    tb.values = j.at("values").get<std::vector<double>>();
    if (tb.values.size() != (std::size_t{1} << tb.items)) throw DimensionError("value table has the wrong size");
    return tb;
  }
  throw ParameterError("unknown valuation type '" + type + "'");
}

Json to_json(const DomainInstance& d) {
  Json bidders = Json::array();
  for (const auto& v : d.bidders) bidders.push_back(to_json(v));
  return {{"generator", d.generator}, {"seed", d.seed}, {"num_items", d.num_items}, {"bidders", bidders}};
}

DomainInstance domain_from_json(const Json& j) {
  DomainInstance d;
  d.generator = j.at("generator").get<std::string>();
  d.seed = j.at("seed").get<std::uint64_t>();
  d.num_items = j.at("num_items").get<std::size_t>();
  for (const auto& b : j.at("bidders")) {
    d.bidders.push_back(valuation_from_json(b));
    if (num_items_of(d.bidders.back()) != d.num_items) throw DimensionError("bidder width mismatch");
  }
  return d;
}

Json to_json(const KernelSpec& k) { return {{"kind", kernel_name(k.kind)}, {"lambda", k.lambda}}; }

KernelSpec kernel_from_json(const Json& j) {
  KernelSpec k{parse_kernel_kind(j.at("kind").get<std::string>()), j.at("lambda").get<double>()};
  k.validate();
  return k;
}

Json to_json(const LearnedValuation& model) {
  if (const auto* lin = std::get_if<LinearModel>(&model)) return {{"type", "linear"}, {"weights", lin->weights}};
  if (std::holds_alternative<OracleModel>(model)) return {{"type", "oracle"}};
  const auto& s = std::get<SvrModel>(model);
  Json svs = Json::array();
  for (const Bundle& b : s.support_vectors) svs.push_back(b.to_string());
  return {{"type", "svr"},          {"kernel", to_json(s.kernel)}, {"epsilon", s.epsilon},
          {"c", s.c},               {"support_vectors", svs},      {"coeffs", s.coeffs},
          {"iterations", s.iterations}, {"kkt_violation", s.kkt_violation}, {"dual_objective", s.dual_objective}};
}

LearnedValuation model_from_json(const Json& j, std::size_t num_items, const std::shared_ptr<const Valuation>& truth) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "linear") {
    LinearModel lin{j.at("weights").get<std::vector<double>>()};
    if (lin.weights.size() != num_items) throw DimensionError("linear model width mismatch");
    return lin;
  }
  if (type == "oracle") {
    if (!truth) throw ParameterError("oracle model needs the true valuation");
    return OracleModel{truth};
  }
  if (type != "svr") throw ParameterError("unknown model type '" + type + "'");
  SvrModel s;
  s.kernel = kernel_from_json(j.at("kernel"));
  s.epsilon = j.at("epsilon").get<double>();
  s.c = j.at("c").get<double>();
  for (const auto& b : j.at("support_vectors")) {
    s.support_vectors.push_back(bundle_from_json(b));
    check_width(s.support_vectors.back(), num_items);
  }
  s.coeffs = j.at("coeffs").get<std::vector<double>>();
  if (s.coeffs.size() != s.support_vectors.size()) throw DimensionError("SVR coefficient count mismatch");
  s.iterations = j.value("iterations", std::size_t{0});
  s.kkt_violation = j.value("kkt_violation", 0.0);
  s.dual_objective = j.value("dual_objective", 0.0);
  return s;
}

Json to_json(const LearnerSpec& s) {
  std::string kind = s.kind == LearnerSpec::Kind::kLinear ? "linear" : s.kind == LearnerSpec::Kind::kSvr ? "svr" : "oracle";
  return {{"kind", kind}, {"kernel", to_json(s.kernel)}, {"epsilon", s.epsilon}, {"c", s.c}};
}

LearnerSpec learner_from_json(const Json& j) {
  LearnerSpec s;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "linear") {
    s.kind = LearnerSpec::Kind::kLinear;
  } else if (kind == "svr") {
    s.kind = LearnerSpec::Kind::kSvr;
  } else if (kind == "oracle") {
    s.kind = LearnerSpec::Kind::kOracle;
  } else {
    throw ParameterError("unknown learner kind '" + kind + "'");
  }
  s.kernel = kernel_from_json(j.at("kernel"));
  s.epsilon = j.at("epsilon").get<double>();
  s.c = j.at("c").get<double>();
  return s;
}

Json to_json(const MlcaConfig& cfg) {
  Json learners = Json::array();
  for (const auto& l : cfg.learners) learners.push_back(to_json(l));
  Json initial = Json::array();
  for (const auto& list : cfg.initial_queries) {
    Json row = Json::array();
    for (const Bundle& b : list) row.push_back(b.to_string());
    initial.push_back(row);
  }
  return {{"q_max", cfg.q_max},
          {"q_init", cfg.q_init},
          {"q_round", cfg.q_round},
          {"p_max", cfg.p_max},
          {"learner", to_json(cfg.learner)},
          {"learners", learners},
          {"seed", cfg.seed},
          {"payment_rule", payment_rule_name(cfg.payment_rule)},
          {"wdp_time_limit", cfg.wdp_time_limit},
          {"initial_queries", initial}};
}

MlcaConfig mlca_config_from_json(const Json& j) {
  MlcaConfig cfg;
  cfg.q_max = j.at("q_max").get<int>();
  cfg.q_init = j.at("q_init").get<int>();
  cfg.q_round = j.at("q_round").get<int>();
  cfg.p_max = j.at("p_max").get<int>();
  cfg.learner = learner_from_json(j.at("learner"));
  for (const auto& l : j.at("learners")) cfg.learners.push_back(learner_from_json(l));
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.payment_rule = parse_payment_rule(j.at("payment_rule").get<std::string>());
  cfg.wdp_time_limit = j.at("wdp_time_limit").get<double>();
  for (const auto& row : j.at("initial_queries")) {
    std::vector<Bundle> list;
    for (const auto& b : row) list.push_back(bundle_from_json(b));
    cfg.initial_queries.push_back(std::move(list));
  }
  return cfg;
}

Json to_json(const BidderStrategy& s) {
  return {{"kind", s.kind == BidderStrategy::Kind::kTruthful ? "truthful" : "overbid"}, {"z", s.z}};
}

BidderStrategy strategy_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "truthful") return BidderStrategy::truthful();
  if (kind == "overbid") return BidderStrategy::overbid(j.at("z").get<double>());
  throw ParameterError("unknown strategy '" + kind + "'");
}

Json to_json(const AuctionOutcome& o) {
  Json trace = Json::array();
  for (const RoundRecord& r : o.trace) {
    Json queries = Json::array();
    for (const auto& per_bidder : r.queries) {
      Json row = Json::array();
      for (const Bundle& b : per_bidder) row.push_back(b.to_string());
      queries.push_back(row);
    }
    trace.push_back({{"round", r.round}, {"queries", queries}, {"answers", r.answers}, {"seconds", r.seconds}});
  }
  Json reports = Json::array();
  for (const auto& r : o.reports) reports.push_back(to_json(r));
  return {{"allocation", allocation_json(o.allocation)},
          {"payments", o.payments.amounts},
          {"rounds", o.rounds},
          {"trace", trace},
          {"reports", reports}};
}

Json to_json(const MlcaRun& run) {
  Json out = to_json(run.outcome);
  out["reported_welfare"] = run.reported_welfare;
  std::vector<int> won;
  for (bool b : run.won_misreported_bundle) won.push_back(b ? 1 : 0);
  out["won_misreported_bundle"] = won;
  return out;
}

Json make_replay(const DomainInstance& domain, const MlcaConfig& cfg, const std::vector<BidderStrategy>& strategies,
                 const MlcaRun& run) {
  Json strat = Json::array();
  for (const auto& s : strategies) strat.push_back(to_json(s));
  Json reports = Json::array();
  for (const auto& r : run.outcome.reports) reports.push_back(to_json(r));
  return {{"domain", to_json(domain)}, {"config", to_json(cfg)}, {"strategies", strat}, {"reports", reports}};
}

MlcaRun replay(const Json& file) {
  const DomainInstance domain = domain_from_json(file.at("domain"));
  const MlcaConfig cfg = mlca_config_from_json(file.at("config"));
  std::vector<BidderStrategy> strategies;
  for (const auto& s : file.at("strategies")) strategies.push_back(strategy_from_json(s));
  MlcaRun run = run_mlca(domain, strategies, cfg);
  Json again = Json::array();
  for (const auto& r : run.outcome.reports) again.push_back(to_json(r));
  if (again != file.at("reports")) throw Error("replay produced different reports");
  return run;
}

Json make_trace(const DomainInstance& domain, const MlcaRun& run) {
  Json economies = Json::array();
  for (const EconomyRecord& rec : run.economies) {
    Json models = Json::array();
    for (std::size_t i = 0; i < rec.models.size(); ++i) {
      models.push_back(rec.economy.contains(i) && rec.models[i] ? to_json(*rec.models[i]) : Json());
    }
    economies.push_back({{"round", rec.round},
                         {"economy", economy_json(rec.economy)},
                         {"models", models},
                         {"learned_optimum", allocation_json(rec.learned_optimum)},
                         {"learned_objective", rec.learned_objective},
                         {"status", status_name(rec.status)},
                         {"gap", rec.gap}});
  }
  return {{"domain", to_json(domain)}, {"outcome", to_json(run)}, {"economies", economies}};
}

MlcaRun run_from_trace(const Json& file, DomainInstance& domain) {
  domain = domain_from_json(file.at("domain"));
  const std::size_t m = domain.num_items;
  MlcaRun run;
  const Json& outcome = file.at("outcome");
  run.outcome.allocation = allocation_from_json(outcome.at("allocation"));
  run.outcome.payments.amounts = outcome.at("payments").get<std::vector<double>>();
  run.outcome.rounds = outcome.at("rounds").get<int>();
  for (const auto& r : outcome.at("reports")) run.outcome.reports.push_back(report_set_from_json(r, m));
  for (const auto& e : file.at("economies")) {
    EconomyRecord rec;
    rec.round = e.at("round").get<int>();
    rec.economy = economy_from_json(e.at("economy"));
    const auto& models = e.at("models");
    for (std::size_t i = 0; i < models.size(); ++i) {
      if (models[i].is_null()) {
        rec.models.push_back(nullptr);
        continue;
      }
      auto truth = std::make_shared<const Valuation>(domain.bidders.at(i));
      rec.models.push_back(std::make_shared<const LearnedValuation>(model_from_json(models[i], m, truth)));
    }
    rec.learned_optimum = allocation_from_json(e.at("learned_optimum"));
    rec.learned_objective = e.at("learned_objective").get<double>();
    rec.gap = e.at("gap").get<double>();
    run.economies.push_back(std::move(rec));
  }
  return run;
}

}  // namespace mlca
