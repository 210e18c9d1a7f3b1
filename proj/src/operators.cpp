#include "stein/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace stein {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

quad::Options tight() {
  quad::Options o;
  o.abs_tol = 1e-14;
  o.rel_tol = 1e-12;
  return o;
}

bool le(double u, double v, double s) { return u <= v + 1e-9 * std::max(s, 1e-300); }

double exp_or_zero(double l) { return std::isinf(l) && l < 0 ? 0.0 : std::exp(l); }

// largest step that keeps x ± h inside the support
double inner_step(const Distribution& d, double x) {
  double h = 1e-3 * (1.0 + std::fabs(x));
  if (std::isfinite(d.lo())) h = std::min(h, 0.5 * (x - d.lo()));
  if (std::isfinite(d.hi())) h = std::min(h, 0.5 * (d.hi() - x));
  return h;
}

}  // namespace

double difference(int ell, const Fn& f, double x, double step) {
  if (ell == 0 || step <= 0) return quad::derivative(f, x, 1e-3 * (1.0 + std::fabs(x)));
  return (f(x + ell * step) - f(x)) / (ell * step);
}

double canonical_apply(const Distribution& d, int ell, const Fn& f, double x) {
  if (!d.in_support(x)) return 0.0;
  double lx = d.log_density(x);
  if (std::isinf(lx)) return 0.0;
  if (d.is_lattice()) {
    double s = d.step();
    double ratio = exp_or_zero(d.log_density(x + ell * s) - lx);
    double fy = ratio == 0.0 ? 0.0 : f(x + ell * s);
    return (fy * ratio - f(x)) / (ell * s);
  }
  double h = inner_step(d, x);
  if (!(h > 0)) return 0.0;
  return quad::derivative([&](double u) { return f(u) * exp_or_zero(d.log_density(u) - lx); }, x, h);
}

double canonical_inverse(const Distribution& d, int ell, const TestFunction& h, double x) {
  if (!d.in_support(x)) return 0.0;
  return h.partial_ratio(d, x - a_ell(ell) * d.step(), x, h.mean(d));
}

double canonical_inverse(const Distribution& d, int ell, const Fn& h, double x) {
  return canonical_inverse(d, ell, TestFunction::generic(h), x);
}

double kernel_ktilde(const Distribution& d, int ell, double x, double y) {
  if (!d.in_support(x) || !d.in_support(y)) return 0.0;
  double sa = a_ell(ell) * d.step();
  double lo = std::min(x, y) - sa, hi = std::max(x, y) - sa;
  double l = d.log_cdf(lo) + d.log_sf(hi) - d.log_density(x) - d.log_density(y);
  return std::isnan(l) ? 0.0 : exp_or_zero(l);
}

double kernel_r(const Distribution& d, int ell, double x, double y) {
  if (!d.in_support(y)) return 0.0;
  double s = d.step(), sa = a_ell(ell) * s;
  double ly = d.log_density(y);
  // P(y - a) - 1 = -P̄(y - a) on the active branch
  if (le(x + sa, y, s)) return -exp_or_zero(d.log_sf(y - sa) - ly);
  return exp_or_zero(d.log_cdf(y - sa) - ly);
}

// ------------------------------------------------------------------ context

SteinContext::SteinContext(const Distribution& d, int ell) : d_(d), ell_(ell) {
  if (d.is_lattice() ? (ell != 1 && ell != -1) : ell != 0)
    throw std::invalid_argument("lattice laws take ell = ±1, continuous laws ell = 0");
}

SteinContext SteinContext::one(const Distribution& d, int ell) {
  SteinContext ctx(d, ell);
  ctx.kind_ = CoefKind::One;
  ctx.label_ = "one";
  ctx.c_ = [](double) { return 1.0; };
  ctx.Tc_ = [d, ell](double x) { return d.score(ell, x); };
  // 1 = -L η with η = -ρ exactly when the score is centred. Lattice sums are
  // exact, so only rounding is forgiven there (binomial's ρ⁻ misses by p(n)).
  double m = d.expect([&](double x) { return d.score(ell, x); });
  if (std::fabs(m) < (d.is_lattice() ? 1e-14 : 1e-7)) {
    double s = d.step();
    ctx.eta_ = [d, ell](double x) { return -d.score(ell, x); };
    ctx.deta_ = [d, ell, s](double x) {
      if (s > 0) return (d.score(ell, x - ell * s) - d.score(ell, x)) / (ell * s);
      double h = inner_step(d, x);
      double v = -quad::derivative([&](double u) { return d.score(0, u); }, x, h);
      // within rounding of a finite edge the stencil leaves the support
      return std::isfinite(v) ? v : 0.0;
    };
  }
  return ctx;
}

SteinContext SteinContext::kernel(const Distribution& d, int ell) {
  if (!std::isfinite(d.mean())) throw std::invalid_argument("kernel standardization needs a finite mean");
  SteinContext ctx(d, ell);
  ctx.kind_ = CoefKind::Kernel;
  ctx.label_ = "kernel";
  double mu = d.mean();
  ctx.c_ = [d, ell](double x) { return d.stein_kernel(ell, x); };
  ctx.Tc_ = [d, mu](double x) { return d.in_support(x) ? mu - x : 0.0; };
  ctx.eta_ = [](double x) { return x; };
  ctx.deta_ = [](double) { return 1.0; };
  return ctx;
}

SteinContext SteinContext::custom(const Distribution& d, int ell, Fn c, Fn Tc, std::string label) {
  SteinContext ctx(d, ell);
  ctx.kind_ = CoefKind::Custom;
  ctx.label_ = std::move(label);
  ctx.c_ = std::move(c);
  ctx.Tc_ = std::move(Tc);
  return ctx;
}

SteinContext SteinContext::from_eta(const Distribution& d, int ell, Fn eta, Fn deta, std::string label) {
  SteinContext ctx(d, ell);
  ctx.kind_ = CoefKind::Custom;
  ctx.label_ = std::move(label);
  auto h = TestFunction::generic(eta);
  double m = h.mean(d);
  double sa = a_ell(ell) * d.step();
  ctx.c_ = [d, h, m, sa](double x) { return d.in_support(x) ? -h.partial_ratio(d, x - sa, x, m) : 0.0; };
  ctx.Tc_ = [d, eta, m](double x) { return d.in_support(x) ? m - eta(x) : 0.0; };
  ctx.eta_ = std::move(eta);
  ctx.deta_ = std::move(deta);
  return ctx;
}

double SteinContext::c(double x) const { return c_(x); }
double SteinContext::Tc(double x) const { return Tc_(x); }

std::optional<double> SteinContext::vanishing_point(const std::vector<double>& grid) const {
  for (double x : grid) {
    bool interior = x > d_.lo() && x < d_.hi() && d_.in_support(x);
    if (interior && !(c_(x) > 0.0)) return x;
  }
  return std::nullopt;
}

// ----------------------------------------------------------------- solution

SteinSolution::SteinSolution(SteinContext ctx, TestFunction h)
    : ctx_(std::move(ctx)), h_(std::move(h)), mean_h_(h_.mean(ctx_.dist())) {}

SteinSolution solve(const SteinContext& ctx, const TestFunction& h) { return SteinSolution(ctx, h); }

double SteinSolution::g(double x) const {
  const auto& d = ctx_.dist();
  int ell = ctx_.ell();
  double s = d.step();
  double y = x + ell * s;
  if (!d.in_support(y)) return 0.0;
  double cy = ctx_.c(y);
  if (cy == 0.0 || !std::isfinite(cy)) return 0.0;
  return h_.partial_ratio(d, x - b_ell(ell) * s, y, mean_h_) / cy;
}

double SteinSolution::dg(double x) const {
  const auto& d = ctx_.dist();
  int ell = ctx_.ell();
  if (d.is_lattice()) {
    double s = d.step();
    return (g(x) - g(x - ell * s)) / (ell * s);
  }
  if (!d.in_support(x)) return 0.0;
  double cx = ctx_.c(x);
  if (cx == 0.0) return 0.0;
  return (hbar(x) - ctx_.Tc(x) * g(x)) / cx;
}

double SteinSolution::residual(double x) const {
  return ctx_.Tc(x) * g(x) + ctx_.c(x) * dg(x) - hbar(x);
}

// ---------------------------------------------------------- representations

double expect_dh(const Distribution& d, int ell, const TestFunction& h, const Fn& phi,
                 const std::vector<double>& extra_breaks) {
  if (d.is_lattice()) {
    double s = d.step();
    return d.expect([&](double u) { return phi(u) * h.delta(ell, u, s); });
  }
  switch (h.kind()) {
    case TestKind::HalfLine: return -phi(h.xi()) * d.density(h.xi());
    case TestKind::PointMass: return 0.0;
    case TestKind::Indicator: {
      double acc = 0.0;
      for (const auto& iv : h.intervals()) acc += phi(iv.lo) * d.density(iv.lo) - phi(iv.hi) * d.density(iv.hi);
      return acc;
    }
    default: {
      auto br = h.breaks();
      br.insert(br.end(), extra_breaks.begin(), extra_breaks.end());
      return d.expect([&](double u) { return phi(u) * h.delta(0, u, 0.0); }, br, tight());
    }
  }
}

namespace {

// E[(f(X2) - f(X1)) χ^ℓ(X1, y, X2)] = E[f 1{X >= y + b}] P(X <= y - a) - E[f 1{X <= y - a}] P(X >= y + b)
double two_copy(const Distribution& d, int ell, const Fn& f, const std::vector<double>& breaks, double y) {
  double s = d.step();
  double lower = y - a_ell(ell) * s, upper = y + b_ell(ell) * s;
  double p1 = d.cdf(lower);
  double p2 = d.is_lattice() ? d.sf(upper - 0.5 * s) : d.sf(upper);
  auto fp = [&](double u) {
    double pu = d.density(u);
    return pu > 0.0 ? f(u) * pu : 0.0;
  };
  double h1 = d.integrate(fp, -kInf, lower, breaks, tight());
  double h2 = d.integrate(fp, upper, kInf, breaks, tight());
  return h2 * p1 - h1 * p2;
}

}  // namespace

RepresentationResidual representation_check(const SteinContext& ctx, const TestFunction& h, double x) {
  const auto& d = ctx.dist();
  int ell = ctx.ell();
  double s = d.step(), sa = a_ell(ell) * s, sb = b_ell(ell) * s;
  double y = x + ell * s;
  auto sol = solve(ctx, h);
  RepresentationResidual r;
  r.g_direct = sol.g(x);
  r.dg_direct = sol.dg(x);
  auto hf = [&](double u) { return h(u); };

  double cy = d.in_support(y) ? ctx.c(y) : 0.0;
  double py = d.density(y);
  double e2 = 0.0;
  if (cy != 0.0 && py > 0) {
    e2 = two_copy(d, ell, hf, h.breaks(), y);
    r.sol1 = -e2 / (py * cy);
    r.sol2 = -expect_dh(d, ell, h, [&](double u) { return kernel_ktilde(d, ell, y, u); }, {y}) / cy;
  }

  double cx = ctx.c(x);
  double tcx = ctx.Tc(x);
  double hb = sol.hbar(x);
  if (cx == 0.0 || !d.in_support(x)) {
    r.der1 = r.der2 = r.dersol1 = r.dersol2 = kNaN;
  } else {
    r.der1 = hb / cx - tcx * r.sol1 / cx;
    if (cy != 0.0) {
      auto w = [&](double u) { return kernel_r(d, ell, x, u) * cy + tcx * kernel_ktilde(d, ell, y, u); };
      r.der2 = expect_dh(d, ell, h, w, {x, y}) / (cx * cy);
    } else {
      r.der2 = hb / cx;
    }
    if (ctx.has_eta() && cy != 0.0 && py > 0) {
      // these two are written for c = L η' with η' = -η
      Fn etap = [&](double u) { return -ctx.eta(u); };
      double e_eta = two_copy(d, ell, etap, {}, y);
      r.dersol1 = (tcx * e2 - hb * e_eta) / (py * cx * cy);

      auto pbar_w = [&](double u) { return exp_or_zero(d.log_sf(u - sa) - d.log_density(u)); };
      auto p_w = [&](double u) { return exp_or_zero(d.log_cdf(u - sa) - d.log_density(u)); };
      auto chi_up = [&](double u) { return le(x + sa, u, s) ? 1.0 : 0.0; };   // χ^ℓ(x, u)
      auto chi_dn = [&](double u) { return le(u + sb, x, s) ? 1.0 : 0.0; };   // χ^{-ℓ}(u, x)
      double a1 = expect_dh(d, ell, h, [&](double u) { return pbar_w(u) * chi_up(u); }, {x});
      double a2 = expect_dh(d, ell, h, [&](double u) { return p_w(u) * chi_dn(u); }, {x});
      auto deta_p = [&](double u) { return -ctx.deta(u); };
      double b1 = d.expect([&](double u) { return deta_p(u) * p_w(u) * chi_dn(u); }, {x}, tight());
      double b2 = d.expect([&](double u) { return deta_p(u) * pbar_w(u) * chi_up(u); }, {x}, tight());
      r.dersol2 = (a1 * b1 - a2 * b2) / (py * cx * cy);
    } else {
      r.dersol1 = r.dersol2 = kNaN;
    }
  }

  auto dev = [&](double a, double b) { return std::isnan(a) ? 0.0 : std::fabs(a - b); };
  r.max_dev = std::max({dev(r.sol1, r.g_direct), dev(r.sol2, r.g_direct), dev(r.der1, r.dg_direct),
                        dev(r.der2, r.dg_direct), dev(r.dersol1, r.dg_direct), dev(r.dersol2, r.dg_direct)});
  return r;
}

IdentityResidual identity_residual(const SteinContext& ctx, const Fn& g, std::size_t mc_n, std::uint64_t seed) {
  const auto& d = ctx.dist();
  int ell = ctx.ell();
  double s = d.step();
  auto integrand = [&](double u) { return ctx.Tc(u) * g(u) + ctx.c(u) * difference(-ell, g, u, s); };
  IdentityResidual out;
  if (mc_n == 0) {
    out.value = d.expect(integrand, {}, tight());
    return out;
  }
  auto xs = d.sample(mc_n, seed);
  std::vector<double> v(xs.size());
  std::transform(xs.begin(), xs.end(), v.begin(), integrand);
  double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double ss = 0.0;
  for (double t : v) ss += (t - m) * (t - m);
  out.value = m;
  out.stderr_ = std::sqrt(ss / (v.size() - 1) / v.size());
  return out;
}

}  // namespace stein
