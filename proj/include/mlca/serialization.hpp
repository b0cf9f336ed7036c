#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "mlca/core.hpp"
#include "mlca/learning.hpp"
#include "mlca/mlca.hpp"
#include "mlca/valuemodels.hpp"

namespace mlca {

using Json = nlohmann::json;

Json to_json(const Bundle& b);
Bundle bundle_from_json(const Json& j);

Json to_json(const ReportSet& r);
ReportSet report_set_from_json(const Json& j, std::size_t num_items);

Json to_json(const Valuation& v);
Valuation valuation_from_json(const Json& j);

Json to_json(const DomainInstance& d);
DomainInstance domain_from_json(const Json& j);

Json to_json(const KernelSpec& k);
KernelSpec kernel_from_json(const Json& j);

Json to_json(const LearnedValuation& model);
/// Oracle models refer to `truth`, which must then be given.
LearnedValuation model_from_json(const Json& j, std::size_t num_items,
                                 const std::shared_ptr<const Valuation>& truth = nullptr);

Json to_json(const LearnerSpec& s);
LearnerSpec learner_from_json(const Json& j);

Json to_json(const MlcaConfig& cfg);
MlcaConfig mlca_config_from_json(const Json& j);

Json to_json(const BidderStrategy& s);
BidderStrategy strategy_from_json(const Json& j);

Json to_json(const AuctionOutcome& o);
Json to_json(const MlcaRun& run);

/// Domain, configuration, strategies and elicited reports of one run.
Json make_replay(const DomainInstance& domain, const MlcaConfig& cfg, const std::vector<BidderStrategy>& strategies,
                 const MlcaRun& run);

/// Reruns a replay file. Throws Error when the rerun's reports differ.
MlcaRun replay(const Json& file);

/// Trace file for certification: domain plus the query-module records.
Json make_trace(const DomainInstance& domain, const MlcaRun& run);
/// Rebuilds the parts of a run that bound_report reads.
MlcaRun run_from_trace(const Json& file, DomainInstance& domain);

}  // namespace mlca
