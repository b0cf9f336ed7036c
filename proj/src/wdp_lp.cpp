// LP-format export of the winner determination program, for cross-checks
// with external MIP solvers.
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "mlca/wdp.hpp"

namespace mlca {

namespace {

std::string a_var(std::size_t i, std::size_t j) { return "a_" + std::to_string(i) + "_" + std::to_string(j); }

std::string z_var(std::size_t i, std::size_t k, std::size_t t) {
  return "z_" + std::to_string(i) + "_" + std::to_string(k) + "_" + std::to_string(t);
}

// Accumulates "+ c name" terms, wrapping long lines.
class Expr {
 public:
  void add(double c, const std::string& name) {
    if (c == 0.0) return;
    std::ostringstream os;
    os << std::setprecision(17) << (c < 0 ? " - " : " + ") << std::abs(c) << " " << name;
    push(os.str());
  }
  void push(const std::string& piece) {
    if (width_ + piece.size() > 200) {
      text_ += "\n  ";
      width_ = 2;
    }
    text_ += piece;
    width_ += piece.size();
  }
  bool empty() const { return text_.empty(); }
  const std::string& str() const { return text_; }

 private:
  std::string text_;
  std::size_t width_ = 0;
};

bool uses_terms(const LearnedValuation& model) {
  const auto* svr = std::get_if<SvrModel>(&model);
  return svr != nullptr && (svr->kernel.kind == KernelKind::kExponential || svr->kernel.kind == KernelKind::kGaussian);
}

}  // namespace

void write_lp(const WdpProblem& p, std::ostream& os) {
  const std::size_t m = p.num_items;
  os << "\\ winner determination, economy " << p.economy.tag() << ", " << m << " items\n";
  for (std::size_t i : p.economy.members()) {
    if (std::holds_alternative<OracleModel>(*p.models[i])) {
      os << "\\ bidder " << i << " has an oracle model without an integer encoding\n";
      return;
    }
  }

  Expr objective;
  Expr quadratic;
  std::vector<std::string> constraints;
  std::vector<std::string> binaries;

  for (std::size_t i : p.economy.members()) {
    for (std::size_t j = 0; j < m; ++j) binaries.push_back(a_var(i, j));
    const LearnedValuation& model = *p.models[i];
    if (const auto* lin = std::get_if<LinearModel>(&model)) {
      for (std::size_t j = 0; j < m; ++j) objective.add(lin->weights[j], a_var(i, j));
      continue;
    }
    const auto& svr = std::get<SvrModel>(model);
    if (!uses_terms(model)) {
      const double lambda = svr.kernel.kind == KernelKind::kQuadratic ? svr.kernel.lambda : 0.0;
      std::vector<double> lin(m, 0.0);
      std::vector<double> quad(m * m, 0.0);
      for (std::size_t k = 0; k < svr.support_vectors.size(); ++k) {
        const auto items = svr.support_vectors[k].items();
        for (std::size_t a = 0; a < items.size(); ++a) {
          lin[items[a]] += svr.coeffs[k] * (1.0 + lambda);
          for (std::size_t b = a + 1; b < items.size(); ++b) quad[items[a] * m + items[b]] += 2.0 * lambda * svr.coeffs[k];
        }
      }
      for (std::size_t j = 0; j < m; ++j) objective.add(lin[j], a_var(i, j));
      for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
          // LP format halves the bracketed quadratic part.
          quadratic.add(2.0 * quad[a * m + b], a_var(i, a) + " * " + a_var(i, b));
        }
      }
      continue;
    }
    const bool rbf = !svr.kernel.is_dot_product();
    for (std::size_t k = 0; k < svr.support_vectors.size(); ++k) {
      const Bundle& x = svr.support_vectors[k];
      const std::size_t top = rbf ? m : x.count();
      Expr simplex;
      Expr link;
      for (std::size_t t = 0; t <= top; ++t) {
        const std::string z = z_var(i, k, t);
        binaries.push_back(z);
        objective.add(svr.coeffs[k] * kernel_profile(svr.kernel, t), z);
        simplex.add(1.0, z);
        link.add(-static_cast<double>(t + 1), z);
      }
      // Σ_{j∈x} a_ij (dot) or Σ_{j∈x}(1−a_ij) + Σ_{j∉x} a_ij (rbf) equals
      // Σ_τ (τ+1) z − 1; constants move to the right-hand side.
      double rhs = -1.0;
      for (std::size_t j = 0; j < m; ++j) {
        if (x.contains(j)) {
          link.add(rbf ? -1.0 : 1.0, a_var(i, j));
          if (rbf) rhs -= 1.0;
        } else if (rbf) {
          link.add(1.0, a_var(i, j));
        }
      }
      std::ostringstream c1;
      c1 << " pick_" << i << "_" << k << ":" << simplex.str() << " = 1";
      constraints.push_back(c1.str());
      std::ostringstream c2;
      c2 << std::setprecision(17) << " link_" << i << "_" << k << ":" << link.str() << " = " << rhs;
      constraints.push_back(c2.str());
    }
  }

  for (std::size_t j = 0; j < m; ++j) {
    Expr e;
    for (std::size_t i : p.economy.members()) e.add(1.0, a_var(i, j));
    constraints.push_back(" item_" + std::to_string(j) + ":" + e.str() + " <= 1");
  }
  if (!p.exclusions.empty()) {
    for (std::size_t i : p.economy.members()) {
      std::size_t c = 0;
      for (const Bundle& x : p.exclusions[i]) {
        Expr e;
        for (std::size_t j = 0; j < m; ++j) e.add(x.contains(j) ? -1.0 : 1.0, a_var(i, j));
        if (e.empty()) e.push(" 0 " + a_var(i, 0));
        std::ostringstream line;
        line << " cut_" << i << "_" << c++ << ":" << e.str() << " >= " << 1.0 - static_cast<double>(x.count());
        constraints.push_back(line.str());
      }
    }
  }

  os << "Maximize\n obj:" << objective.str();
  if (!quadratic.empty()) os << " + [" << quadratic.str() << " ] / 2";
  if (objective.empty() && quadratic.empty()) os << " 0 " << a_var(p.economy.members().front(), 0);
  os << "\nSubject To\n";
  for (const auto& c : constraints) os << c << "\n";
  os << "Binary\n";
  for (const auto& b : binaries) os << " " << b << "\n";
  os << "End\n";
}

}  // namespace mlca
