// mlca: command-line experiment runner.
#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mlca/diagnostics.hpp"
#include "mlca/errors.hpp"
#include "mlca/experiments.hpp"
#include "mlca/serialization.hpp"

namespace {

struct CommonOptions {
  std::string domain = "gsvm";
  std::size_t m = 12;
  std::size_t n = 5;
  std::string seeds = "1..30";
  int qmax = 40;
  int qinit = 12;
  int qround = 5;
  std::string ml = "svr";
  std::string kernel = "quadratic";
  double eps = 0.0;
  double c = 1e4;
  double lambda = 0.1;
  std::string payment = "vcg";
  double time_limit = 60.0;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--domain", o.domain, "Value model")->check(CLI::IsMember({"gsvm", "twowise"}));
  cmd->add_option("--m", o.m, "Number of items");
  cmd->add_option("--n", o.n, "Number of bidders");
  cmd->add_option("--seeds", o.seeds, "Seed range A..B");
  cmd->add_option("--qmax", o.qmax, "Maximum value queries per bidder");
  cmd->add_option("--qinit", o.qinit, "Initial random queries per bidder");
  cmd->add_option("--qround", o.qround, "Queries per bidder and round");
  cmd->add_option("--ml", o.ml, "Learner")->check(CLI::IsMember({"svr", "regression", "oracle"}));
  cmd->add_option("--kernel", o.kernel, "SVR kernel")
      ->check(CLI::IsMember({"linear", "quadratic", "exponential", "gaussian"}));
  cmd->add_option("--eps", o.eps, "SVR insensitivity");
  cmd->add_option("--c", o.c, "Regularization constant");
  cmd->add_option("--lambda", o.lambda, "Kernel parameter");
  cmd->add_option("--payment", o.payment, "Payment rule")->check(CLI::IsMember({"vcg", "vcg-nearest"}));
  cmd->add_option("--time-limit", o.time_limit, "WDP time limit in seconds");
}

mlca::ExperimentConfig make_config(const CommonOptions& o) {
  mlca::ExperimentConfig cfg;
  cfg.domain = {o.domain, o.m, o.n};
  mlca::parse_seed_range(o.seeds, cfg.first_seed, cfg.last_seed);
  cfg.mlca.q_max = o.qmax;
  cfg.mlca.q_init = o.qinit;
  cfg.mlca.q_round = o.qround;
  cfg.mlca.wdp_time_limit = o.time_limit;
  if (o.ml == "oracle") {
    cfg.mlca.learner = mlca::LearnerSpec::oracle();
  } else if (o.ml == "regression") {
    cfg.mlca.learner = mlca::LearnerSpec::linear(o.c);
  } else {
    const mlca::KernelKind kind = mlca::parse_kernel_kind(o.kernel);
    const double lambda = kind == mlca::KernelKind::kLinear ? 0.0 : o.lambda;
    cfg.mlca.learner = mlca::LearnerSpec::svr({kind, lambda}, o.eps, o.c);
  }
  cfg.payment_rule = mlca::parse_payment_rule(o.payment);
  return cfg;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw mlca::ParameterError("bad number '" + item + "'");
    }
  }
  return out;
}

// Writes to `path`, or stdout for "-".
template <typename Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw mlca::Error("cannot open " + path);
  write(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MLCA auction simulator"};
  app.require_subcommand(1);

  CommonOptions run_o;
  std::string mechanism = "mlca";
  std::string heuristic = "clock";
  std::size_t profit_q = 40;
  std::string out_path;
  std::string seed_out;
  std::string trace_out;
  std::string replay_out;
  bool timing = false;
  auto* run = app.add_subcommand("run", "Run a seeded batch of one or more mechanisms");
  add_common(run, run_o);
  run->add_option("--mechanism", mechanism, "mlca, cca, vcg, random or a comma list");
  run->add_option("--heuristic", heuristic, "CCA supplementary heuristic")
      ->check(CLI::IsMember({"clock", "clock-raised", "profit-max"}));
  run->add_option("--profit-q", profit_q, "Bundles per bidder for profit-max");
  run->add_option("--out", out_path, "Summary CSV");
  run->add_option("--per-seed", seed_out, "Per-seed CSV");
  run->add_option("--trace", trace_out, "MLCA trace JSON (first seed)");
  run->add_option("--replay-out", replay_out, "MLCA replay JSON (first seed)");
  run->add_flag("--timing", timing, "Include wall-clock columns");

  CommonOptions grid_o;
  std::string grid_kernels = "linear,quadratic,exponential,gaussian";
  std::string grid_eps = "0,0.5,2";
  std::string grid_q = "20,40,80";
  std::string grid_out;
  bool grid_timing = false;
  auto* grid = app.add_subcommand("grid", "Kernel / epsilon / sample-size study");
  add_common(grid, grid_o);
  grid->add_option("--kernels", grid_kernels, "Comma list of kernels");
  grid->add_option("--eps-list", grid_eps, "Comma list of epsilons");
  grid->add_option("--q", grid_q, "Comma list of sample sizes");
  grid->add_option("--out", grid_out, "CSV output");
  grid->add_flag("--timing", grid_timing, "Include wall-clock columns");

  CommonOptions man_o;
  std::string role = "national";
  std::string z_list = "0.25,0.5,0.75,0.99";
  std::string man_out;
  auto* manipulate = app.add_subcommand("manipulate", "Overbidding study with one-way ANOVA");
  add_common(manipulate, man_o);
  manipulate->add_option("--role", role, "national, regional or a bidder index");
  manipulate->add_option("--z", z_list, "Comma list of overbidding shares");
  manipulate->add_option("--out", man_out, "CSV output");

  std::string trace_in;
  std::string certify_out;
  auto* certify = app.add_subcommand("certify", "Efficiency-loss bounds and clearing certificates of a trace");
  certify->add_option("--trace", trace_in, "Trace JSON written by run --trace")->required();
  certify->add_option("--out", certify_out, "CSV output");

  std::string replay_in;
  auto* replay_cmd = app.add_subcommand("replay", "Rerun a replay file and check it reproduces");
  replay_cmd->add_option("--file", replay_in, "Replay JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      mlca::ExperimentConfig cfg = make_config(run_o);
      cfg.mechanisms.clear();
      std::stringstream ss(mechanism);
      std::string item;
      while (std::getline(ss, item, ',')) cfg.mechanisms.push_back(item);
      cfg.cca.heuristic = mlca::parse_heuristic(heuristic);
      cfg.cca.profit_max_q = profit_q;
      cfg.include_timing = timing;
      const auto rows = mlca::run_batch(cfg);
      emit(out_path, [&](std::ostream& os) { mlca::write_results_csv(rows, os, timing); });
      if (!seed_out.empty()) emit(seed_out, [&](std::ostream& os) { mlca::write_seed_csv(rows, os, timing); });
      if (!trace_out.empty() || !replay_out.empty()) {
        const auto domain = mlca::generate_domain(cfg.domain.generator, cfg.first_seed, cfg.domain.num_items,
                                                  cfg.domain.num_bidders);
        mlca::MlcaConfig mc = cfg.mlca;
        mc.seed = cfg.first_seed;
        mc.payment_rule = cfg.payment_rule;
        const auto result = mlca::run_mlca(domain, {}, mc);
        if (!trace_out.empty()) {
          emit(trace_out, [&](std::ostream& os) { os << mlca::make_trace(domain, result).dump(1) << "\n"; });
        }
        if (!replay_out.empty()) {
          emit(replay_out, [&](std::ostream& os) { os << mlca::make_replay(domain, mc, {}, result).dump(1) << "\n"; });
        }
      }
    } else if (grid->parsed()) {
      mlca::ExperimentConfig cfg = make_config(grid_o);
      std::stringstream ss(grid_kernels);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto kind = mlca::parse_kernel_kind(item);
        cfg.kernels.push_back({kind, kind == mlca::KernelKind::kLinear ? 0.0 : grid_o.lambda});
      }
      cfg.epsilons = parse_list(grid_eps);
      cfg.sample_sizes.clear();
      for (double q : parse_list(grid_q)) cfg.sample_sizes.push_back(static_cast<int>(q));
      const auto rows = mlca::kernel_grid(cfg);
      emit(grid_out, [&](std::ostream& os) { mlca::write_grid_csv(rows, os, grid_timing); });
    } else if (manipulate->parsed()) {
      const mlca::ExperimentConfig cfg = make_config(man_o);
      const auto table = mlca::manipulation_study(cfg, mlca::parse_role(role, cfg.domain.num_bidders), parse_list(z_list));
      emit(man_out, [&](std::ostream& os) { mlca::write_manipulation_csv(table, os); });
    } else if (certify->parsed()) {
      std::ifstream in(trace_in);
      if (!in) throw mlca::Error("cannot open " + trace_in);
      const mlca::Json file = mlca::Json::parse(in);
      mlca::DomainInstance domain;
      const mlca::MlcaRun result = mlca::run_from_trace(file, domain);
      const auto records = mlca::bound_report(result, domain);
      emit(certify_out, [&](std::ostream& os) { mlca::write_bound_csv(records, os); });
    } else if (replay_cmd->parsed()) {
      std::ifstream in(replay_in);
      if (!in) throw mlca::Error("cannot open " + replay_in);
      const auto result = mlca::replay(mlca::Json::parse(in));
      std::cout << "replay reproduced " << result.outcome.rounds << " rounds\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
