#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stein/distribution.hpp"
#include "stein/test_function.hpp"

namespace stein {

using Fn = std::function<double(double)>;

//! Δ^ℓ f(x): forward/backward difference on a lattice, derivative when ell == 0
double difference(int ell, const Fn& f, double x, double step);

//! T_p^ℓ f(x) = Δ^ℓ(f p)(x) / p(x); 0 outside the support
double canonical_apply(const Distribution& d, int ell, const Fn& f, double x);
//! L_p^ℓ h(x) = (1/p(x)) ∫_{u <= x - a_ℓ} (h - E h) p dμ; 0 outside the support
double canonical_inverse(const Distribution& d, int ell, const TestFunction& h, double x);
double canonical_inverse(const Distribution& d, int ell, const Fn& h, double x);

//! P(x∧y - a_ℓ) P̄(x∨y - a_ℓ) / (p(x) p(y))
double kernel_ktilde(const Distribution& d, int ell, double x, double y);
//! (P(y - a_ℓ) - χ^ℓ(x, y)) / p(y), χ^ℓ(x, y) = 1[x + a_ℓ <= y]
double kernel_r(const Distribution& d, int ell, double x, double y);

enum class CoefKind { One, Kernel, Custom };

// Distribution + lattice direction + coefficient c of A g = T c · g + c Δ^{-ℓ} g.
class SteinContext {
 public:
  static SteinContext one(const Distribution& d, int ell);
  //! c = τ_p^ℓ = -L_p^ℓ Id
  static SteinContext kernel(const Distribution& d, int ell);
  static SteinContext custom(const Distribution& d, int ell, Fn c, Fn Tc, std::string label = "custom");
  //! c = -L_p^ℓ η, so T c = E η - η
  static SteinContext from_eta(const Distribution& d, int ell, Fn eta, Fn deta, std::string label = "eta");

  const Distribution& dist() const { return d_; }
  int ell() const { return ell_; }
  double step() const { return d_.step(); }
  CoefKind kind() const { return kind_; }
  const std::string& label() const { return label_; }

  double c(double x) const;
  double Tc(double x) const;
  //! c is of the form -L η (needed by the η-type factor bounds)
  bool has_eta() const { return static_cast<bool>(eta_); }
  double eta(double x) const { return eta_(x); }
  //! Δ^{-ℓ} η
  double deta(double x) const { return deta_(x); }

  //! first interior grid point where c fails to be positive
  std::optional<double> vanishing_point(const std::vector<double>& grid) const;

 private:
  SteinContext(const Distribution& d, int ell);
  Distribution d_;
  int ell_;
  CoefKind kind_ = CoefKind::One;
  Fn c_, Tc_, eta_, deta_;
  std::string label_;
};

// g_h for the c-Stein equation, g(x) = L h(x+ℓ) / c(x+ℓ), zero when x+ℓ leaves the support.
class SteinSolution {
 public:
  SteinSolution(SteinContext ctx, TestFunction h);

  double g(double x) const;
  //! Δ^{-ℓ} g; lattice: direct difference, continuous: (h̄ - T c g) / c
  double dg(double x) const;
  double hbar(double x) const { return h_(x) - mean_h_; }
  bool closed_form() const { return h_.is_indicator(); }
  double mean_h() const { return mean_h_; }
  const SteinContext& context() const { return ctx_; }
  const TestFunction& h() const { return h_; }

  //! T c(x) g(x) + c(x) Δ^{-ℓ} g(x) - h̄(x)
  double residual(double x) const;

 private:
  SteinContext ctx_;
  TestFunction h_;
  double mean_h_;
};

SteinSolution solve(const SteinContext& ctx, const TestFunction& h);

//! E[φ(X) Δ^{-ℓ} h(X)]; jumps of indicators enter as point masses on continuous laws
double expect_dh(const Distribution& d, int ell, const TestFunction& h, const Fn& phi,
                 const std::vector<double>& extra_breaks = {});

struct RepresentationResidual {
  double g_direct = 0, dg_direct = 0;
  double sol1 = 0, sol2 = 0;          // two-copy and K̃ forms of g
  double der1 = 0, der2 = 0;          // h̄/T c form and R/K̃ form of Δg
  double dersol1 = 0, dersol2 = 0;    // η forms (NaN when c is not -L η)
  double max_dev = 0;
};

//! evaluates every representation of g and Δ^{-ℓ}g at x against the direct solution
RepresentationResidual representation_check(const SteinContext& ctx, const TestFunction& h, double x);

struct IdentityResidual {
  double value = 0;
  double stderr_ = 0;  // 0 for quadrature
};

//! E[T c(X) g(X) + c(X) Δ^{-ℓ} g(X)]; mc_n == 0 selects quadrature/summation
IdentityResidual identity_residual(const SteinContext& ctx, const Fn& g, std::size_t mc_n = 0,
                                   std::uint64_t seed = 1);

}  // namespace stein
