#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stein/operators.hpp"
#include "stein/parallel.hpp"

namespace stein {

// Seven bound families on |g| / |Δ^{-ℓ}g|, plus the pointwise minimum of the
// κ₁ and κ₂ versions when both exist.
enum class BoundKind { G_K1, DG_K1, G_K2, DG_K2, G_LIP, DG_ETA_K1, DG_ETA_K2, G_MIN, DG_MIN };

std::string to_string(BoundKind k);
//! bounds |g| (true) or |Δ^{-ℓ} g| (false)
bool bounds_g(BoundKind k);

struct FactorBound {
  BoundKind kind = BoundKind::G_K1;
  std::string name;
  bool applicable = true;
  std::string reason;  // set when not applicable
  Fn pointwise;        // x -> bound, >= 0, +inf allowed
  double uniform = std::numeric_limits<double>::quiet_NaN();
  double argmax = std::numeric_limits<double>::quiet_NaN();
  double resolution = 0.0;  // grid spacing around argmax (0 on lattices: exact)
  bool unbounded = false;

  double operator()(double x) const { return pointwise(x); }
};

struct FactorOptions {
  int grid_n = 400;
  par::Exec exec = par::Exec::Parallel;
  //! k with |h(x) - h(y)| <= k |η(x) - η(y)|; defaults to κ₂ when η = Id
  std::optional<double> lip_k;
  //! false: pointwise envelopes only, no grid sups
  bool uniform = true;
};

//! points used for uniform sups: the truncated lattice, or a mixed quantile/linear grid
std::vector<double> evaluation_grid(const Distribution& d, int n);

//! sup of f over the evaluation grid, golden-refined at the argmax (continuous);
//! monotone growth into the far tails is reported as +inf
void compute_uniform(FactorBound& b, const Distribution& d, int n, par::Exec exec = par::Exec::Parallel);

//! every bound family, applicable or not, with uniform sups filled in
std::vector<FactorBound> factor_bounds(const SteinContext& ctx, const TestFunction& h, const FactorOptions& opt = {});

const FactorBound* find(const std::vector<FactorBound>& v, BoundKind k);

// ---------------------------------------------------------------- point mass

struct MonotoneCheck {
  bool pass = true;
  std::optional<double> violation;  // first lattice point breaking monotonicity
  std::string diagnostic;
};

//! P(x-1)/(τ⁺(x)p(x)) non-decreasing for x <= ξ, (1-P(x-1))/(τ⁺(x)p(x)) non-increasing for x > ξ
MonotoneCheck monotone_ratio_check(const Distribution& d, double xi);

struct DiscretePointMassBounds {
  MonotoneCheck check;
  double sup_g = 0;          // max{P(ξ-1)/τ⁺(ξ), (1-P(ξ))/τ⁻(ξ)}
  double sup_dg = 0;         // P(ξ-1)/τ⁺(ξ) + (1-P(ξ))/τ⁻(ξ), attained
  double sup_dg_case = 0;    // (1-p(ξ))/τ^± according to the side of the mean
  double sup_dg_min = 0;     // (1-p(ξ))/min(τ⁺, τ⁻)
};

//! unit lattices only; throws std::invalid_argument otherwise. Values are NaN when the check fails.
DiscretePointMassBounds discrete_pointmass_bounds(const Distribution& d, double xi);

struct BorelBounds {
  MonotoneCheck check;
  double sup_g = 0;   // p(A) sup_{ξ∈A} max{1/(τ⁺p), 1/(τ⁻p)}
  double sup_dg = 0;  // sup_{ξ∈A} B_p(ξ)
};

BorelBounds discrete_borel_bounds(const Distribution& d, const std::vector<double>& A);

//! B_p(ξ) = P(ξ-1)/τ⁺(ξ) + (1-P(ξ))/τ⁻(ξ)
double pointmass_b(const Distribution& d, double xi);

// ------------------------------------------------------------ specialised

enum class Standardization { One, Kernel };

struct SpecializedSet {
  SteinContext ctx;
  std::vector<FactorBound> curves;
};

//! closed-form curves for one family; several contexts for lattice laws (ℓ = ±1)
std::vector<SpecializedSet> specialized_bounds(const Distribution& d, Standardization st, double kappa1,
                                               double kappa2, const FactorOptions& opt = {});

// ------------------------------------------------------------------ export

//! rows "x,bound_kind,value" for each applicable bound at each grid point
void write_csv(std::ostream& os, const std::vector<FactorBound>& bounds, const std::vector<double>& xs,
               bool header = true);

}  // namespace stein
