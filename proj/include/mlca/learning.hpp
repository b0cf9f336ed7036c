#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "mlca/bundle.hpp"
#include "mlca/core.hpp"
#include "mlca/valuemodels.hpp"

namespace mlca {

enum class KernelKind { kLinear, kQuadratic, kExponential, kGaussian };

struct KernelSpec {
  KernelKind kind = KernelKind::kLinear;
  double lambda = 0.0;

  static KernelSpec linear() { return {KernelKind::kLinear, 0.0}; }
  static KernelSpec quadratic(double lambda) { return {KernelKind::kQuadratic, lambda}; }
  static KernelSpec exponential(double lambda) { return {KernelKind::kExponential, lambda}; }
  static KernelSpec gaussian(double lambda) { return {KernelKind::kGaussian, lambda}; }

  /// Throws ParameterError for λ < 0, or λ = 0 with exponential/gaussian.
  void validate() const;
  /// Kernels that depend on x·x' only (everything but gaussian).
  bool is_dot_product() const { return kind != KernelKind::kGaussian; }
};

std::string kernel_name(KernelKind kind);
KernelKind parse_kernel_kind(const std::string& name);

double kernel_eval(const KernelSpec& k, const Bundle& x, const Bundle& y);

/// κ̄(τ): the kernel as a function of the overlap x·x' (dot-product kernels)
/// or of the Hamming distance ‖x − x'‖² (gaussian).
double kernel_profile(const KernelSpec& k, std::size_t tau);

struct LinearModel {
  std::vector<double> weights;
};

/// Trained SVR: predictions are Σ_k coeffs[k] · κ(x, support_vectors[k]).
struct SvrModel {
  KernelSpec kernel;
  double epsilon = 0.0;
  double c = 1.0;
  std::vector<Bundle> training_bundles;
  std::vector<double> training_values;
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<Bundle> support_vectors;
  std::vector<double> coeffs;
  std::size_t iterations = 0;
  double kkt_violation = 0.0;
  double dual_objective = 0.0;
};

/// Wraps a true valuation; a learner with zero learning error.
struct OracleModel {
  std::shared_ptr<const Valuation> valuation;
};

using LearnedValuation = std::variant<LinearModel, SvrModel, OracleModel>;

double predict(const LinearModel& model, const Bundle& x);
double predict(const SvrModel& model, const Bundle& x);
double predict(const LearnedValuation& model, const Bundle& x);

/// argmin_w c·Σ_k (v̂_k − w·x_k)² + ‖w‖², via (XᵀX + I/c) w = Xᵀv̂.
LinearModel train_linear(const ReportSet& reports, double c);

struct SvrOptions {
  double tolerance = 1e-5;
  /// One sweep is ℓ single-pair updates.
  std::size_t max_sweeps = 1'000'000;
};

/// Maximizes the bias-free SVR dual over α, β ∈ [0, c]^ℓ by coordinate
/// ascent on the pair (α_k, β_k) with the largest KKT violation.
SvrModel train_svr(const ReportSet& reports, const KernelSpec& kernel, double epsilon, double c,
                   const SvrOptions& options = {});

/// Dual objective −½ γᵀKγ − ε Σ(α+β) + v̂ᵀγ with γ = α − β.
double svr_dual_objective(const KernelSpec& kernel, const std::vector<Bundle>& bundles,
                          const std::vector<double>& values, const std::vector<double>& alpha,
                          const std::vector<double>& beta, double epsilon);

/// Mean of |v(x) − ṽ(x)| over `sample`.
double learning_error(const LearnedValuation& model, const Valuation& truth, const std::vector<Bundle>& sample);

/// All 2^m bundles when m ≤ 18, otherwise 100,000 seeded uniform draws.
std::vector<Bundle> learning_error_sample(std::size_t num_items, std::uint64_t seed);

/// How a bidder's valuation is learned from his reports.
struct LearnerSpec {
  enum class Kind { kLinear, kSvr, kOracle };
  Kind kind = Kind::kSvr;
  KernelSpec kernel = KernelSpec::quadratic(0.1);
  double epsilon = 0.0;
  double c = 1e4;

  static LearnerSpec linear(double c = 1e4) { return {Kind::kLinear, KernelSpec::linear(), 0.0, c}; }
  static LearnerSpec svr(KernelSpec kernel, double epsilon, double c) { return {Kind::kSvr, kernel, epsilon, c}; }
  static LearnerSpec oracle() { return {Kind::kOracle, KernelSpec::linear(), 0.0, 1.0}; }
  std::string describe() const;
};

/// Trains one bidder's model. `truth` is required for oracle learners.
LearnedValuation train_model(const LearnerSpec& spec, const ReportSet& reports,
                             const std::shared_ptr<const Valuation>& truth);

/// Number of support vectors (SVR), nonzero weights (linear) or 0 (oracle).
std::size_t model_size(const LearnedValuation& model);

}  // namespace mlca
