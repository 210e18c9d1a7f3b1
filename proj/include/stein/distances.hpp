#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stein/distribution.hpp"
#include "stein/operators.hpp"
#include "stein/parallel.hpp"
#include "stein/test_function.hpp"

namespace stein {

enum class Metric { Kolmogorov, TV, Wasserstein };
enum class Method { ScoreDiff, KernelDiff, CrossMeasure };

std::string to_string(Metric m);
std::string to_string(Method m);
//! accepts kol/kolmogorov, tv, wass/wasserstein
Metric parse_metric(std::string_view s);
//! accepts score, kernel, cross
Method parse_method(std::string_view s);

// X_n ~ approx compared with X_∞ ~ target. Ordered: the bounds are not symmetric.
struct ComparisonProblem {
  Distribution approx;
  Distribution target;
  Metric metric = Metric::TV;
  Method method = Method::ScoreDiff;
  int ell = 0;

  ComparisonProblem reversed() const;
  std::string direction() const;
};

//! validates the pair for the method; ell defaults to 0 (continuous) or +1 (lattice)
ComparisonProblem make_problem(const Distribution& approx, const Distribution& target, Metric metric,
                               Method method, std::optional<int> ell = {});

enum class KappaKind { Kappa1Star, Kappa1StarPm, KappaId, KappaIdPm, KappaNEll };
std::string to_string(KappaKind k);
KappaKind parse_kappa_kind(std::string_view s);

// log|F| along points approaching one endpoint of S_n ∩ S_∞
struct LimitTrace {
  double endpoint = 0.0;
  bool upper = true;
  std::vector<std::pair<double, double>> points;  // (x, log|F(x)|)
  double value = 0.0;
  std::string verdict;
};

struct KappaTerms {
  KappaKind kind = KappaKind::Kappa1Star;
  double value = 0.0;
  std::vector<LimitTrace> limit_diagnostics;
};

//! an endpoint limit that does not settle numerically
class KappaError : public std::runtime_error {
 public:
  KappaError(const std::string& what, LimitTrace trace) : std::runtime_error(what), trace_(std::move(trace)) {}
  const LimitTrace& trace() const { return trace_; }

 private:
  LimitTrace trace_;
};

struct BoundReport {
  Metric metric = Metric::TV;
  Method method = Method::ScoreDiff;
  std::string direction;
  int ell = 0;
  double bound = 0.0;
  KappaTerms kappa;
  std::optional<double> oracle;
  bool dominates_oracle = true;
  std::vector<std::pair<std::string, double>> details;
  std::vector<std::pair<std::string, double>> params;

  //! NaN when absent
  double detail(std::string_view key) const;
};

std::string to_json(const BoundReport& r, int indent = 2);
BoundReport report_from_json(std::string_view text);
bool operator==(const BoundReport& a, const BoundReport& b);

// c and T c for the approximating law
struct Coefficient {
  Fn c, Tc;
  std::string label;

  static Coefficient one(const Distribution& d, int ell);
  //! c = τ^ℓ, T c = μ - x
  static Coefficient kernel(const Distribution& d, int ell);
  //! c = -L^ℓ η, T c = E η - η
  static Coefficient from_eta(const Distribution& d, int ell, Fn eta);
  //! T c by the canonical operator (numerical derivative on continuous laws)
  static Coefficient custom(const Distribution& d, int ell, Fn c, std::string label = "custom");
};

// E h(X_n) - E h(X_∞) split as in the comparison identities
struct Difference {
  double value = 0.0;
  double main = 0.0;     // the (ρ or τ difference) × solution term
  double outside = 0.0;  // E_n[(h - E_∞h) 1{X_n ∉ S_∞}]
  KappaTerms kappa;
};

//! E_n[(ρ_∞ - ρ_n) L_∞h(X_n+ℓ)] + κ₁*(h)
Difference diff_expectation_score(const ComparisonProblem& prob, const TestFunction& h);
//! E_n[(τ_n - τ_∞) Δ^{-ℓ}(-L_∞h(·+ℓ)/τ_∞(·+ℓ))] + κ_Id(h)
Difference diff_expectation_kernel(const ComparisonProblem& prob, const TestFunction& h);
//! E_n[(T_∞c₁ - T_n c₂) g] + E_n[c₁ Δ_∞g - c₂ Δ_n^{-ℓ} g] + E_n[T_n(c₂ g(·-ℓ))], g solving the c₁ equation;
//! the last term is returned as kappa (kind KappaNEll)
Difference generic_comparison(const ComparisonProblem& prob, const SteinContext& target_ctx,
                              const Coefficient& approx_coef, const TestFunction& h);
//! η-form: c_i = -L_i η_i
Difference generic_comparison_eta(const ComparisonProblem& prob, Fn eta1, Fn deta1, Fn eta2,
                                  const TestFunction& h);

// A_n^∞ = {p_n >= p_∞}
struct ASet {
  bool lattice = false;
  std::vector<Interval> intervals;
  std::vector<double> points;
  std::vector<double> crossings;  // located sign changes (continuous)
  TestFunction indicator() const;
};
ASet locate_A_set(const ComparisonProblem& prob);

//! κ for h in the identity of the given kind (signed)
KappaTerms kappa_terms(const ComparisonProblem& prob, KappaKind kind, const TestFunction& h);
//! h = 1(-∞, z]
KappaTerms kappa_terms(const ComparisonProblem& prob, KappaKind kind, double z);

struct BoundOptions {
  bool oracle = true;
  int z_grid = 513;
  par::Exec exec = par::Exec::Parallel;
};

BoundReport kolmogorov_bound(const ComparisonProblem& prob, const BoundOptions& opt = {});
BoundReport tv_bound(const ComparisonProblem& prob, const BoundOptions& opt = {});
BoundReport wasserstein_bound(const ComparisonProblem& prob, const BoundOptions& opt = {});
//! Pareto maxima → Fréchet (Kolmogorov/TV) and standardized binomial → N(0,1) (Wasserstein)
BoundReport cross_measure_bound(const ComparisonProblem& prob, const BoundOptions& opt = {});
//! dispatch on metric and method
BoundReport bound(const ComparisonProblem& prob, const BoundOptions& opt = {});

}  // namespace stein
