#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "mlca/core.hpp"
#include "mlca/learning.hpp"

namespace mlca {

enum class WdpStatus { kOptimal, kTimeoutFeasible, kInfeasible };

std::string status_name(WdpStatus status);

/// Learned-welfare maximization over the bidders of one economy.
struct WdpProblem {
  std::size_t num_items = 0;
  /// Indexed by bidder; only members of `economy` are read.
  std::vector<std::shared_ptr<const LearnedValuation>> models;
  EconomyIndex economy;
  /// Indexed by bidder (may be empty): forbidden values of a_i. The empty
  /// bundle is only excluded when listed explicitly.
  std::vector<std::vector<Bundle>> exclusions;
  double time_limit = 60.0;
  /// When nonempty, solve() writes the integer program here in LP format.
  std::string lp_dump_path;
};

struct WdpSolution {
  Allocation allocation;
  double objective = 0.0;
  /// Proven upper bound on the learned welfare.
  double bound = 0.0;
  WdpStatus status = WdpStatus::kInfeasible;
  /// Set when the search timed out before finding anything better than the
  /// empty allocation.
  bool trivial_incumbent = false;
  std::size_t nodes = 0;
  double seconds = 0.0;

  /// (bound − objective) / objective, or the absolute gap when the
  /// objective is not positive (see gap_is_absolute()).
  double gap() const;
  bool gap_is_absolute() const { return !(objective > 0.0); }
};

/// Exact optimum by tabulating every model over all bundles and running the
/// dense subset DP. Ties go to the lexicographically smallest allocation.
WdpSolution solve_enumeration(const WdpProblem& p);

/// Branch-and-bound for linear models (regression, or SVR with the linear
/// kernel).
WdpSolution solve_linear_ip(const WdpProblem& p);

/// Branch-and-bound for quadratic-kernel SVR (linear models may be mixed in).
WdpSolution solve_quadratic(const WdpProblem& p);

/// Branch-and-bound on the kernel-term encoding for exponential and
/// gaussian SVR models.
WdpSolution solve_kernel_generic(const WdpProblem& p);

/// Dispatches on model kinds and writes the LP dump if requested.
WdpSolution solve(const WdpProblem& p);

/// Writes the integer program of `p` in CPLEX LP format.
void write_lp(const WdpProblem& p, std::ostream& os);

/// Σ_{i∈I} predict(model_i, a_i).
double learned_welfare(const WdpProblem& p, const Allocation& a);

/// True when a_i hits none of bidder i's exclusions for every member i.
bool respects_exclusions(const WdpProblem& p, const Allocation& a);

}  // namespace mlca
