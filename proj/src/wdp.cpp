#include "mlca/wdp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <unordered_set>

#include "mlca/errors.hpp"

namespace mlca {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

inline int popcount(std::uint64_t x) { return __builtin_popcountll(x); }

enum class ModelClass { kOracle, kLinear, kQuadratic, kKernel };

ModelClass classify(const LearnedValuation& model) {
  if (std::holds_alternative<OracleModel>(model)) return ModelClass::kOracle;
  if (std::holds_alternative<LinearModel>(model)) return ModelClass::kLinear;
  switch (std::get<SvrModel>(model).kernel.kind) {
    case KernelKind::kLinear: return ModelClass::kLinear;
    case KernelKind::kQuadratic: return ModelClass::kQuadratic;
    default: return ModelClass::kKernel;
  }
}

void validate(const WdpProblem& p) {
  const std::size_t n = p.economy.num_bidders();
  if (n == 0) throw ParameterError("WDP needs a nonempty economy");
  if (p.num_items == 0 || p.num_items > kMaxItems) throw DimensionError("WDP item count out of range");
  if (p.models.size() != n) throw DimensionError("one model per bidder expected");
  if (!p.exclusions.empty() && p.exclusions.size() != n) throw DimensionError("one exclusion set per bidder expected");
  if (!(p.time_limit >= 0.0)) throw ParameterError("time limit must be nonnegative");
  for (std::size_t i : p.economy.members()) {
    if (!p.models[i]) throw ParameterError("missing model for bidder " + std::to_string(i));
    const auto& model = *p.models[i];
    if (const auto* lin = std::get_if<LinearModel>(&model)) {
      if (lin->weights.size() != p.num_items) throw DimensionError("linear model width mismatch");
    } else if (const auto* svr = std::get_if<SvrModel>(&model)) {
      for (const Bundle& sv : svr->support_vectors) check_width(sv, p.num_items);
      if (svr->coeffs.size() != svr->support_vectors.size()) throw DimensionError("SVR coefficients mismatch");
    } else {
      const auto& o = std::get<OracleModel>(model);
      if (!o.valuation || num_items_of(*o.valuation) != p.num_items) {
        throw DimensionError("oracle model width mismatch");
      }
    }
    if (!p.exclusions.empty()) {
      for (const Bundle& b : p.exclusions[i]) check_width(b, p.num_items);
    }
  }
}

// Objective of one bidder as Σ_j L_j a_j + Σ_{j<j'} Q_jj' a_j a_j'.
struct PseudoBoolean {
  std::size_t m = 0;
  std::vector<double> lin;
  std::vector<double> quad;  // m*m, symmetric, zero diagonal
  std::vector<double> quad_pos;

  double q(std::size_t a, std::size_t b) const { return quad[a * m + b]; }

  double value(std::uint64_t mask) const {
    double v = 0.0;
    for (std::uint64_t rest = mask; rest != 0; rest &= rest - 1) {
      const auto j = static_cast<std::size_t>(__builtin_ctzll(rest));
      v += lin[j];
      for (std::uint64_t later = rest & (rest - 1); later != 0; later &= later - 1) {
        v += q(j, static_cast<std::size_t>(__builtin_ctzll(later)));
      }
    }
    return v;
  }
};

PseudoBoolean expand_pseudo_boolean(const LearnedValuation& model, std::size_t m) {
  PseudoBoolean pb;
  pb.m = m;
  pb.lin.assign(m, 0.0);
  pb.quad.assign(m * m, 0.0);
  if (const auto* lin = std::get_if<LinearModel>(&model)) {
    pb.lin = lin->weights;
  } else {
    const auto& svr = std::get<SvrModel>(model);
    const bool quadratic = svr.kernel.kind == KernelKind::kQuadratic;
    const double lambda = quadratic ? svr.kernel.lambda : 0.0;
    // c (s + λ s²) with s = Σ_{j∈x} a_j and a_j² = a_j.
    for (std::size_t k = 0; k < svr.support_vectors.size(); ++k) {
      const double c = svr.coeffs[k];
      const auto items = svr.support_vectors[k].items();
      for (std::size_t a = 0; a < items.size(); ++a) {
        pb.lin[items[a]] += c * (1.0 + lambda);
        if (!quadratic) continue;
        for (std::size_t b = a + 1; b < items.size(); ++b) {
          pb.quad[items[a] * m + items[b]] += 2.0 * lambda * c;
          pb.quad[items[b] * m + items[a]] += 2.0 * lambda * c;
        }
      }
    }
  }
  pb.quad_pos.resize(pb.quad.size());
  for (std::size_t k = 0; k < pb.quad.size(); ++k) pb.quad_pos[k] = std::max(pb.quad[k], 0.0);
  return pb;
}

// Objective of one bidder as Σ_k c_k κ̄(τ_k), τ_k an overlap or a Hamming
// distance to the support bundle.
struct KernelTerm {
  double coeff = 0.0;
  std::uint64_t support = 0;
};

struct TermModel {
  bool rbf = false;
  std::vector<double> profile;  // κ̄(τ), τ = 0..m
  std::vector<KernelTerm> terms;

  int tau(std::uint64_t support, std::uint64_t mask) const {
    return rbf ? popcount(support ^ mask) : popcount(support & mask);
  }
  double value(std::uint64_t mask) const {
    double v = 0.0;
    for (const auto& t : terms) v += t.coeff * profile[static_cast<std::size_t>(tau(t.support, mask))];
    return v;
  }
};

TermModel expand_terms(const LearnedValuation& model, std::size_t m) {
  TermModel tm;
  tm.profile.resize(m + 1);
  if (const auto* lin = std::get_if<LinearModel>(&model)) {
    for (std::size_t t = 0; t <= m; ++t) tm.profile[t] = static_cast<double>(t);
    for (std::size_t j = 0; j < m; ++j) {
      if (lin->weights[j] != 0.0) tm.terms.push_back({lin->weights[j], std::uint64_t{1} << j});
    }
    return tm;
  }
  const auto& svr = std::get<SvrModel>(model);
  tm.rbf = !svr.kernel.is_dot_product();
  for (std::size_t t = 0; t <= m; ++t) {
    tm.profile[t] = kernel_profile(svr.kernel, t);
    if (!std::isfinite(tm.profile[t])) throw NumericOverflowError("kernel profile overflows");
  }
  for (std::size_t k = 0; k < svr.support_vectors.size(); ++k) {
    tm.terms.push_back({svr.coeffs[k], svr.support_vectors[k].mask()});
  }
  return tm;
}

// Bounds for the item-wise pseudo-boolean encoding. Adding S ⊆ U to a_i
// gains at most Σ_{j∈S} g_ij with
//   g_ij = L_ij + Σ_{j'∈a_i} Q_ijj' + ½ Σ_{j'∈U} max(Q_ijj', 0),
// so each free item contributes at most max(0, max_i g_ij).
struct PseudoBooleanPolicy {
  std::vector<PseudoBoolean> slots;

  double value(std::size_t s, std::uint64_t mask) const { return slots[s].value(mask); }

  double bound(const std::vector<std::uint64_t>& masks, std::uint64_t undecided) const {
    double total = 0.0;
    for (std::size_t s = 0; s < slots.size(); ++s) total += slots[s].value(masks[s]);
    for (std::uint64_t rest = undecided; rest != 0; rest &= rest - 1) {
      const auto j = static_cast<std::size_t>(__builtin_ctzll(rest));
      double best = 0.0;
      for (std::size_t s = 0; s < slots.size(); ++s) {
        const PseudoBoolean& pb = slots[s];
        const double* row = &pb.quad[j * pb.m];
        const double* row_pos = &pb.quad_pos[j * pb.m];
        double g = pb.lin[j];
        for (std::uint64_t a = masks[s]; a != 0; a &= a - 1) g += row[__builtin_ctzll(a)];
        double pos = 0.0;
        for (std::uint64_t u = undecided; u != 0; u &= u - 1) pos += row_pos[__builtin_ctzll(u)];
        g += 0.5 * pos;
        best = std::max(best, g);
      }
      total += best;
    }
    return total;
  }

  std::vector<double> influence(std::size_t m) const {
    std::vector<double> out(m, 0.0);
    for (const auto& pb : slots) {
      for (std::size_t j = 0; j < m; ++j) {
        double v = std::abs(pb.lin[j]);
        for (std::size_t k = 0; k < m; ++k) v += std::abs(pb.q(j, k));
        out[j] = std::max(out[j], v);
      }
    }
    return out;
  }
};

// Bounds for the kernel-term encoding: every term is maximized on its own
// over the τ values its bidder can still reach, ignoring item capacities
// between bidders. All profiles used here are monotone in τ, so the range
// endpoints suffice.
struct TermPolicy {
  std::vector<TermModel> slots;

  double value(std::size_t s, std::uint64_t mask) const { return slots[s].value(mask); }

  double bound(const std::vector<std::uint64_t>& masks, std::uint64_t undecided) const {
    double total = 0.0;
    for (std::size_t s = 0; s < slots.size(); ++s) {
      const TermModel& tm = slots[s];
      const std::uint64_t a = masks[s];
      for (const auto& t : tm.terms) {
        int lo = 0;
        int hi = 0;
        if (tm.rbf) {
          const int d = popcount(t.support ^ a);
          lo = d - popcount(t.support & undecided);
          hi = d + popcount(undecided & ~t.support);
        } else {
          lo = popcount(t.support & a);
          hi = lo + popcount(t.support & undecided);
        }
        total += std::max(t.coeff * tm.profile[static_cast<std::size_t>(lo)],
                          t.coeff * tm.profile[static_cast<std::size_t>(hi)]);
      }
    }
    return total;
  }

  std::vector<double> influence(std::size_t m) const {
    std::vector<double> out(m, 0.0);
    for (const auto& tm : slots) {
      const double spread = tm.profile.back() - tm.profile.front();
      for (std::size_t j = 0; j < m; ++j) {
        double v = 0.0;
        for (const auto& t : tm.terms) {
          if (tm.rbf || ((t.support >> j) & 1U)) v += std::abs(t.coeff);
        }
        out[j] = std::max(out[j], v * std::abs(spread));
      }
    }
    return out;
  }
};

struct Node {
  double bound = 0.0;
  std::size_t depth = 0;
  std::uint64_t seq = 0;
  std::vector<std::uint64_t> masks;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.seq > b.seq;
  }
};

constexpr double kPruneTolerance = 1e-9;

// Best-first branch-and-bound over item -> owner assignments. Items are
// branched in order of decreasing objective influence; each node fixes the
// owner (or no owner) of one more item.
template <class Policy>
WdpSolution branch_and_bound(const WdpProblem& p, const Policy& policy) {
  const auto start = Clock::now();
  const std::size_t m = p.num_items;
  const auto& members = p.economy.members();
  const std::size_t k = members.size();

  std::vector<std::unordered_set<std::uint64_t>> excluded(k);
  if (!p.exclusions.empty()) {
    for (std::size_t s = 0; s < k; ++s) {
      for (const Bundle& b : p.exclusions[members[s]]) excluded[s].insert(b.mask());
    }
  }
  auto allowed = [&](const std::vector<std::uint64_t>& masks) {
    for (std::size_t s = 0; s < k; ++s) {
      if (!excluded[s].empty() && excluded[s].count(masks[s]) != 0) return false;
    }
    return true;
  };

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  const auto infl = policy.influence(m);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return infl[a] > infl[b]; });
  // undecided_after[d] = items order[d..m)
  std::vector<std::uint64_t> undecided_from(m + 1, 0);
  for (std::size_t d = m; d-- > 0;) undecided_from[d] = undecided_from[d + 1] | (std::uint64_t{1} << order[d]);

  bool have = false;
  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<std::uint64_t> best_masks(k, 0);
  auto offer = [&](const std::vector<std::uint64_t>& masks) {
    if (!allowed(masks)) return;
    double v = 0.0;
    for (std::size_t s = 0; s < k; ++s) v += policy.value(s, masks[s]);
    if (!have || v > best_value + 1e-12) {
      have = true;
      best_value = v;
      best_masks = masks;
    }
  };

  std::vector<std::uint64_t> masks(k, 0);
  offer(masks);
  // Greedy start: each item to the bidder with the largest positive gain.
  for (std::size_t j : order) {
    const std::uint64_t bit = std::uint64_t{1} << j;
    double best_gain = 1e-12;
    std::size_t pick = k;
    for (std::size_t s = 0; s < k; ++s) {
      const double gain = policy.value(s, masks[s] | bit) - policy.value(s, masks[s]);
      if (gain > best_gain) {
        best_gain = gain;
        pick = s;
      }
    }
    if (pick < k) masks[pick] |= bit;
  }
  offer(masks);

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::uint64_t seq = 0;
  open.push(Node{policy.bound(std::vector<std::uint64_t>(k, 0), undecided_from[0]), 0, seq++,
                 std::vector<std::uint64_t>(k, 0)});

  std::size_t nodes = 0;
  bool timed_out = false;
  while (!open.empty()) {
    if (have && open.top().bound <= best_value + kPruneTolerance) break;
    if ((nodes & 31U) == 0 && seconds_since(start) >= p.time_limit) {
      timed_out = true;
      break;
    }
    Node node = open.top();
    open.pop();
    ++nodes;
    const std::size_t j = order[node.depth];
    const std::uint64_t bit = std::uint64_t{1} << j;
    const std::size_t child_depth = node.depth + 1;
    for (std::size_t choice = 0; choice <= k; ++choice) {
      std::vector<std::uint64_t> child = node.masks;
      if (choice < k) child[choice] |= bit;
      if (child_depth == m) {
        offer(child);
        continue;
      }
      const double b = policy.bound(child, undecided_from[child_depth]);
      if (have && b <= best_value + kPruneTolerance) continue;
      offer(child);
      open.push(Node{b, child_depth, seq++, std::move(child)});
    }
  }

  WdpSolution sol;
  sol.nodes = nodes;
  sol.allocation = Allocation::empty(p.economy.num_bidders(), m);
  if (have) {
    for (std::size_t s = 0; s < k; ++s) sol.allocation.bundles[members[s]] = Bundle(m, best_masks[s]);
    sol.objective = learned_welfare(p, sol.allocation);
  }
  if (timed_out) {
    sol.status = have ? WdpStatus::kTimeoutFeasible : WdpStatus::kInfeasible;
    sol.bound = open.empty() ? sol.objective : std::max(open.top().bound, sol.objective);
    sol.trivial_incumbent =
        have && std::all_of(best_masks.begin(), best_masks.end(), [](std::uint64_t x) { return x == 0; });
  } else {
    sol.status = have ? WdpStatus::kOptimal : WdpStatus::kInfeasible;
    sol.bound = sol.objective;
  }
  sol.seconds = seconds_since(start);
  return sol;
}

std::vector<ModelClass> member_classes(const WdpProblem& p) {
  std::vector<ModelClass> out;
  for (std::size_t i : p.economy.members()) out.push_back(classify(*p.models[i]));
  return out;
}

PseudoBooleanPolicy pseudo_boolean_policy(const WdpProblem& p) {
  PseudoBooleanPolicy policy;
  for (std::size_t i : p.economy.members()) policy.slots.push_back(expand_pseudo_boolean(*p.models[i], p.num_items));
  return policy;
}

WdpSolution solve_terms(const WdpProblem& p) {
  TermPolicy policy;
  for (std::size_t i : p.economy.members()) policy.slots.push_back(expand_terms(*p.models[i], p.num_items));
  return branch_and_bound(p, policy);
}

}  // namespace

std::string status_name(WdpStatus status) {
  switch (status) {
    case WdpStatus::kOptimal: return "optimal";
    case WdpStatus::kTimeoutFeasible: return "timeout-feasible";
    case WdpStatus::kInfeasible: return "infeasible";
  }
  return "?";
}

double WdpSolution::gap() const {
  if (objective > 0.0) return (bound - objective) / objective;
  return bound - objective;
}

double learned_welfare(const WdpProblem& p, const Allocation& a) {
  double total = 0.0;
  for (std::size_t i : p.economy.members()) total += predict(*p.models[i], a.bundles[i]);
  return total;
}

bool respects_exclusions(const WdpProblem& p, const Allocation& a) {
  if (p.exclusions.empty()) return true;
  for (std::size_t i : p.economy.members()) {
    for (const Bundle& b : p.exclusions[i]) {
      if (a.bundles[i] == b) return false;
    }
  }
  return true;
}

WdpSolution solve_enumeration(const WdpProblem& p) {
  validate(p);
  const auto start = Clock::now();
  const std::size_t m = p.num_items;
  const auto& members = p.economy.members();
  if (!dense_oracle_supports(members.size(), m)) {
    throw CapabilityError("WDP enumeration too large for " + std::to_string(members.size()) + " bidders and " +
                          std::to_string(m) + " items");
  }
  DenseWelfareProblem dense;
  dense.num_items = m;
  dense.num_bidders = p.economy.num_bidders();
  dense.bidders = members;
  const std::size_t states = std::size_t{1} << m;
  for (std::size_t i : members) {
    std::vector<double> row(states);
    for (std::uint64_t mask = 0; mask < states; ++mask) row[mask] = predict(*p.models[i], Bundle(m, mask));
    dense.values.push_back(std::move(row));
    std::vector<char> ok;
    if (!p.exclusions.empty() && !p.exclusions[i].empty()) {
      ok.assign(states, 1);
      for (const Bundle& b : p.exclusions[i]) ok[b.mask()] = 0;
    }
    dense.allowed.push_back(std::move(ok));
  }
  const DenseWelfareResult r = maximize_dense(dense);
  WdpSolution sol;
  sol.allocation = r.allocation;
  if (r.feasible) {
    sol.status = WdpStatus::kOptimal;
    sol.objective = learned_welfare(p, sol.allocation);
    sol.bound = sol.objective;
  }
  sol.seconds = seconds_since(start);
  return sol;
}

WdpSolution solve_linear_ip(const WdpProblem& p) {
  validate(p);
  for (ModelClass c : member_classes(p)) {
    if (c != ModelClass::kLinear) throw ModelKindError("linear IP needs linear models");
  }
  return branch_and_bound(p, pseudo_boolean_policy(p));
}

WdpSolution solve_quadratic(const WdpProblem& p) {
  validate(p);
  for (ModelClass c : member_classes(p)) {
    if (c != ModelClass::kQuadratic && c != ModelClass::kLinear) {
      throw ModelKindError("quadratic encoding needs quadratic-kernel SVR models");
    }
  }
  return branch_and_bound(p, pseudo_boolean_policy(p));
}

WdpSolution solve_kernel_generic(const WdpProblem& p) {
  validate(p);
  for (ModelClass c : member_classes(p)) {
    if (c != ModelClass::kKernel) throw ModelKindError("generic encoding needs exponential or gaussian SVR models");
  }
  return solve_terms(p);
}

WdpSolution solve(const WdpProblem& p) {
  validate(p);
  if (!p.lp_dump_path.empty()) {
    std::ofstream out(p.lp_dump_path);
    if (!out) throw Error("cannot write LP file " + p.lp_dump_path);
    write_lp(p, out);
  }
  const auto classes = member_classes(p);
  auto all = [&](auto pred) { return std::all_of(classes.begin(), classes.end(), pred); };
  if (!all([](ModelClass c) { return c != ModelClass::kOracle; })) return solve_enumeration(p);
  if (all([](ModelClass c) { return c == ModelClass::kLinear; })) return solve_linear_ip(p);
  if (all([](ModelClass c) { return c == ModelClass::kLinear || c == ModelClass::kQuadratic; })) {
    return solve_quadratic(p);
  }
  // Exponential/gaussian, possibly mixed with the others: every kind has a
  // kernel-term form.
  return solve_terms(p);
}

}  // namespace mlca
