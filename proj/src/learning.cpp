#include "mlca/learning.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mlca/errors.hpp"
#include "mlca/rng.hpp"

namespace mlca {

void KernelSpec::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("kernel parameter must be >= 0");
  if ((kind == KernelKind::kExponential || kind == KernelKind::kGaussian) && lambda == 0.0) {
    throw ParameterError("exponential and gaussian kernels need a positive parameter");
  }
}

std::string kernel_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::kLinear: return "linear";
    case KernelKind::kQuadratic: return "quadratic";
    case KernelKind::kExponential: return "exponential";
    case KernelKind::kGaussian: return "gaussian";
  }
  return "?";
}

KernelKind parse_kernel_kind(const std::string& name) {
  if (name == "linear") return KernelKind::kLinear;
  if (name == "quadratic") return KernelKind::kQuadratic;
  if (name == "exponential") return KernelKind::kExponential;
  if (name == "gaussian") return KernelKind::kGaussian;
  throw ParameterError("unknown kernel '" + name + "'");
}

double kernel_profile(const KernelSpec& k, std::size_t tau) {
  const double t = static_cast<double>(tau);
  switch (k.kind) {
    case KernelKind::kLinear: return t;
    case KernelKind::kQuadratic: return t + k.lambda * t * t;
    case KernelKind::kExponential: return std::exp(t / k.lambda);
    case KernelKind::kGaussian: return std::exp(-t / k.lambda);
  }
  return 0.0;
}

double kernel_eval(const KernelSpec& k, const Bundle& x, const Bundle& y) {
  if (x.num_items() != y.num_items()) throw DimensionError("kernel arguments differ in length");
  k.validate();
  return kernel_profile(k, k.is_dot_product() ? x.overlap(y) : x.distance(y));
}

double predict(const LinearModel& model, const Bundle& x) {
  check_width(x, model.weights.size());
  double total = 0.0;
  for (std::uint64_t rest = x.mask(); rest != 0; rest &= rest - 1) {
    total += model.weights[static_cast<std::size_t>(__builtin_ctzll(rest))];
  }
  return total;
}

double predict(const SvrModel& model, const Bundle& x) {
  double total = 0.0;
  for (std::size_t k = 0; k < model.support_vectors.size(); ++k) {
    const Bundle& sv = model.support_vectors[k];
    const std::size_t tau = model.kernel.is_dot_product() ? x.overlap(sv) : x.distance(sv);
    total += model.coeffs[k] * kernel_profile(model.kernel, tau);
  }
  return total;
}

double predict(const LearnedValuation& model, const Bundle& x) {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, OracleModel>) {
          return value_of(*m.valuation, x);
        } else {
          return predict(m, x);
        }
      },
      model);
}

LinearModel train_linear(const ReportSet& reports, double c) {
  if (!(c > 0.0)) throw ParameterError("regularization constant c must be positive");
  if (reports.empty()) throw ParameterError("linear regression needs at least one report");
  const std::size_t m = reports.num_items();
  const std::size_t l = reports.size();
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(m));
  Eigen::VectorXd v(static_cast<Eigen::Index>(l));
  for (std::size_t k = 0; k < l; ++k) {
    const auto& r = reports.reports()[k];
    for (std::size_t j : r.bundle.items()) x(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = 1.0;
    v(static_cast<Eigen::Index>(k)) = r.value;
  }
  Eigen::MatrixXd normal = x.transpose() * x;
  normal.diagonal().array() += 1.0 / c;
  const Eigen::VectorXd w = normal.ldlt().solve(x.transpose() * v);
  LinearModel model;
  model.weights.assign(w.data(), w.data() + w.size());
  return model;
}

double svr_dual_objective(const KernelSpec& kernel, const std::vector<Bundle>& bundles,
                          const std::vector<double>& values, const std::vector<double>& alpha,
                          const std::vector<double>& beta, double epsilon) {
  const std::size_t l = bundles.size();
  double quad = 0.0;
  double lin = 0.0;
  for (std::size_t a = 0; a < l; ++a) {
    const double ga = alpha[a] - beta[a];
    lin += values[a] * ga - epsilon * (alpha[a] + beta[a]);
    if (ga == 0.0) continue;
    for (std::size_t b = 0; b < l; ++b) {
      quad += ga * (alpha[b] - beta[b]) * kernel_eval(kernel, bundles[a], bundles[b]);
    }
  }
  return -0.5 * quad + lin;
}

SvrModel train_svr(const ReportSet& reports, const KernelSpec& kernel, double epsilon, double c,
                   const SvrOptions& options) {
  kernel.validate();
  if (!(epsilon >= 0.0)) throw ParameterError("epsilon must be nonnegative");
  if (!(c > 0.0)) throw ParameterError("c must be positive");
  if (reports.empty()) throw ParameterError("SVR needs at least one report");

  SvrModel model;
  model.kernel = kernel;
  model.epsilon = epsilon;
  model.c = c;
  const std::size_t l = reports.size();
  for (const auto& r : reports.reports()) {
    model.training_bundles.push_back(r.bundle);
    model.training_values.push_back(r.value);
  }
  const auto& xs = model.training_bundles;
  const auto& vs = model.training_values;

  std::vector<double> gram(l * l);
  for (std::size_t a = 0; a < l; ++a) {
    for (std::size_t b = a; b < l; ++b) {
      const double kv = kernel_eval(kernel, xs[a], xs[b]);
      if (!std::isfinite(kv)) {
        throw NumericOverflowError("kernel matrix entry is not finite; increase the kernel parameter");
      }
      gram[a * l + b] = kv;
      gram[b * l + a] = kv;
    }
  }

  // gamma = alpha - beta; grad[k] = v̂_k − (Kγ)_k.
  std::vector<double> gamma(l, 0.0);
  std::vector<double> grad(vs);
  auto violation = [&](std::size_t k) {
    const double g = grad[k];
    const double a = std::max(gamma[k], 0.0);
    const double b = std::max(-gamma[k], 0.0);
    double v = 0.0;
    const double ga = g - epsilon;   // d/dα
    const double gb = -g - epsilon;  // d/dβ
    if (ga > 0.0 && a < c) v = std::max(v, ga);
    if (ga < 0.0 && a > 0.0) v = std::max(v, -ga);
    if (gb > 0.0 && b < c) v = std::max(v, gb);
    if (gb < 0.0 && b > 0.0) v = std::max(v, -gb);
    return v;
  };

  // Coordinate ascent stalls on ill-conditioned Gram matrices (for example
  // the rank-m linear kernel with large c). Periodically run an active-set
  // phase: pick the variables that are free or violate their bound, fix
  // their signs, and take the Newton step on that face, shortened so that
  // nothing leaves its sign orthant or the box.
  const std::size_t newton_period = std::max<std::size_t>(l, 50);
  const double release = 0.1 * options.tolerance;
  auto newton_phase = [&] {
    for (std::size_t rep = 0; rep < 3 * l + 10; ++rep) {
      std::vector<std::size_t> face;
      std::vector<double> sign;
      for (std::size_t q = 0; q < l; ++q) {
        const double g = gamma[q];
        if (g != 0.0 && std::abs(g) < c) {
          face.push_back(q);
          sign.push_back(g > 0.0 ? 1.0 : -1.0);
        } else if (g == 0.0 && grad[q] - epsilon > release) {
          face.push_back(q);
          sign.push_back(1.0);
        } else if (g == 0.0 && -grad[q] - epsilon > release) {
          face.push_back(q);
          sign.push_back(-1.0);
        } else if (g == c && grad[q] - epsilon < -release) {
          face.push_back(q);
          sign.push_back(1.0);
        } else if (g == -c && grad[q] + epsilon > release) {
          face.push_back(q);
          sign.push_back(-1.0);
        }
      }
      bool moved_any = false;
      while (!face.empty() && face.size() <= 300) {
        const auto f = static_cast<Eigen::Index>(face.size());
        Eigen::MatrixXd kff(f, f);
        Eigen::VectorXd r(f);
        for (Eigen::Index x = 0; x < f; ++x) {
          const std::size_t qx = face[static_cast<std::size_t>(x)];
          r(x) = grad[qx] - epsilon * sign[static_cast<std::size_t>(x)];
          for (Eigen::Index y = 0; y < f; ++y) kff(x, y) = gram[qx * l + face[static_cast<std::size_t>(y)]];
        }
        Eigen::VectorXd d = kff.completeOrthogonalDecomposition().solve(r);
        if (!d.allFinite()) break;
        // On a singular face the part of r in the kernel of K_FF is a ray of
        // linear ascent; follow it to the boundary instead.
        const Eigen::VectorXd null_part = r - kff * d;
        double step = 1.0;
        if (null_part.norm() > 1e-9 * std::max(1.0, r.norm())) {
          d = null_part;
          step = std::numeric_limits<double>::infinity();
        }
        if (!(r.dot(d) > 0.0)) break;
        std::vector<std::size_t> blocked;
        for (Eigen::Index x = 0; x < f; ++x) {
          const double g = gamma[face[static_cast<std::size_t>(x)]];
          const double lo = sign[static_cast<std::size_t>(x)] > 0.0 ? 0.0 : -c;
          const double hi = sign[static_cast<std::size_t>(x)] > 0.0 ? c : 0.0;
          double room = std::numeric_limits<double>::infinity();
          if (d(x) > 0.0) room = (hi - g) / d(x);
          if (d(x) < 0.0) room = (lo - g) / d(x);
          if (room <= 1e-14) blocked.push_back(static_cast<std::size_t>(x));
          step = std::min(step, room);
        }
        if (!blocked.empty()) {
          // These would leave their face at once; drop them and retry.
          for (std::size_t k = blocked.size(); k-- > 0;) {
            face.erase(face.begin() + static_cast<std::ptrdiff_t>(blocked[k]));
            sign.erase(sign.begin() + static_cast<std::ptrdiff_t>(blocked[k]));
          }
          continue;
        }
        for (Eigen::Index x = 0; x < f; ++x) {
          const std::size_t qx = face[static_cast<std::size_t>(x)];
          const double lo = sign[static_cast<std::size_t>(x)] > 0.0 ? 0.0 : -c;
          const double hi = sign[static_cast<std::size_t>(x)] > 0.0 ? c : 0.0;
          double next = gamma[qx] + step * d(x);
          next = std::clamp(next, lo, hi);
          // Snap variables that reached a face boundary.
          if (std::abs(next - lo) <= 1e-12 * std::max(1.0, c)) next = lo;
          if (std::abs(next - hi) <= 1e-12 * std::max(1.0, c)) next = hi;
          const double moved = next - gamma[qx];
          if (moved == 0.0) continue;
          gamma[qx] = next;
          moved_any = true;
          const double* row = &gram[qx * l];
          for (std::size_t q = 0; q < l; ++q) grad[q] -= row[q] * moved;
        }
        break;
      }
      if (!moved_any) return;
      double worst_now = 0.0;
      for (std::size_t q = 0; q < l; ++q) worst_now = std::max(worst_now, violation(q));
      if (worst_now <= options.tolerance) return;
    }
  };

  const std::size_t max_iterations = options.max_sweeps * l;
  std::size_t it = 0;
  double worst = 0.0;
  for (; it < max_iterations; ++it) {
    std::size_t k = 0;
    worst = -1.0;
    for (std::size_t q = 0; q < l; ++q) {
      const double v = violation(q);
      if (v > worst) {
        worst = v;
        k = q;
      }
    }
    if (worst <= options.tolerance) break;

    const double kkk = gram[k * l + k];
    const double r = grad[k] + kkk * gamma[k];
    double target = 0.0;
    if (kkk > 1e-12) {
      const double shrunk = std::max(std::abs(r) - epsilon, 0.0);
      target = std::clamp(std::copysign(shrunk, r) / kkk, -c, c);
    } else if (std::abs(r) > epsilon) {
      target = std::copysign(c, r);
    }
    const double delta = target - gamma[k];
    if (delta == 0.0) {
      // A violation with no achievable improvement only arises from
      // rounding; treat it as converged.
      break;
    }
    gamma[k] = target;
    const double* row = &gram[k * l];
    for (std::size_t q = 0; q < l; ++q) grad[q] -= row[q] * delta;
    if ((it + 1) % newton_period == 0) newton_phase();
  }
  if (worst < 0.0) worst = 0.0;

  model.iterations = it;
  model.kkt_violation = worst;
  model.alpha.resize(l);
  model.beta.resize(l);
  for (std::size_t k = 0; k < l; ++k) {
    model.alpha[k] = std::max(gamma[k], 0.0);
    model.beta[k] = std::max(-gamma[k], 0.0);
    if (std::abs(gamma[k]) > 1e-10) {
      model.support_vectors.push_back(xs[k]);
      model.coeffs.push_back(gamma[k]);
    }
  }
  double quad = 0.0;
  double lin = 0.0;
  for (std::size_t k = 0; k < l; ++k) {
    // (Kγ)_k = v̂_k − grad_k
    quad += gamma[k] * (vs[k] - grad[k]);
    lin += vs[k] * gamma[k] - epsilon * std::abs(gamma[k]);
  }
  model.dual_objective = -0.5 * quad + lin;
  return model;
}

double learning_error(const LearnedValuation& model, const Valuation& truth, const std::vector<Bundle>& sample) {
  if (sample.empty()) throw ParameterError("learning error needs a nonempty sample");
  double total = 0.0;
  for (const Bundle& x : sample) total += std::abs(value_of(truth, x) - predict(model, x));
  return total / static_cast<double>(sample.size());
}

std::vector<Bundle> learning_error_sample(std::size_t num_items, std::uint64_t seed) {
  std::vector<Bundle> out;
  if (num_items <= 18) {
    const std::uint64_t states = std::uint64_t{1} << num_items;
    out.reserve(states);
    for (std::uint64_t mask = 0; mask < states; ++mask) out.emplace_back(num_items, mask);
    return out;
  }
  Rng rng(seed, "learning-error-sample");
  const std::uint64_t keep = full_mask(num_items);
  out.reserve(100000);
  for (int s = 0; s < 100000; ++s) out.emplace_back(num_items, rng.next_u64() & keep);
  return out;
}

std::string LearnerSpec::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::kLinear: os << "linear(c=" << c << ")"; break;
    case Kind::kOracle: os << "oracle"; break;
    case Kind::kSvr:
      os << "svr-" << kernel_name(kernel.kind) << "(lambda=" << kernel.lambda << ";eps=" << epsilon << ";c=" << c
         << ")";
      break;
  }
  return os.str();
}

LearnedValuation train_model(const LearnerSpec& spec, const ReportSet& reports,
                             const std::shared_ptr<const Valuation>& truth) {
  switch (spec.kind) {
    case LearnerSpec::Kind::kLinear: return train_linear(reports, spec.c);
    case LearnerSpec::Kind::kSvr: return train_svr(reports, spec.kernel, spec.epsilon, spec.c);
    case LearnerSpec::Kind::kOracle:
      if (!truth) throw ParameterError("oracle learner needs the true valuation");
      return OracleModel{truth};
  }
  throw ParameterError("unknown learner kind");
}

std::size_t model_size(const LearnedValuation& model) {
  if (const auto* s = std::get_if<SvrModel>(&model)) return s->support_vectors.size();
  if (const auto* l = std::get_if<LinearModel>(&model)) {
    return static_cast<std::size_t>(
        std::count_if(l->weights.begin(), l->weights.end(), [](double w) { return w != 0.0; }));
  }
  return 0;
}

}  // namespace mlca
