#include "stein/factors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace stein {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double exp_or_zero(double l) { return std::isinf(l) && l < 0 ? 0.0 : std::exp(l); }

quad::Options tail_opts() {
  // tails can be far below any absolute tolerance and are later divided by p
  quad::Options o;
  o.abs_tol = 1e-300;
  o.rel_tol = 1e-10;
  return o;
}

// E(X-x)⁺ = ∫_{u >= x} P̄ dμ and E(x-X)⁺ = ∫_{u <= x-s} P dμ. Only the lighter
// tail is integrated; the other follows from their difference x - μ.
struct Tails {
  double up, dn;
};

Tails tails(const Distribution& d, double x) {
  double mu = d.mean();
  Tails t;
  if (d.cdf(x) >= 0.5) {
    t.up = d.integrate([&](double u) { return d.sf(u); }, x, kInf, {}, tail_opts());
    t.dn = t.up + (x - mu);
  } else {
    t.dn = d.integrate([&](double u) { return d.cdf(u); }, -kInf, x - d.step(), {}, tail_opts());
    t.up = t.dn - (x - mu);
  }
  return {std::max(t.up, 0.0), std::max(t.dn, 0.0)};
}

// U·D / p(y) without forming p(y): the lighter tail is integrated as a ratio to p(y)
double tails_product_over_density(const Distribution& d, double x, double y) {
  double mu = d.mean(), ly = d.log_density(y);
  if (d.cdf(x) >= 0.5) {
    double ur = d.integrate([&](double u) { return std::exp(d.log_sf(u) - ly); }, x, kInf, {}, tail_opts());
    double dn = std::max(ur * std::exp(ly) + (x - mu), 0.0);
    return ur * dn;
  }
  double dr = d.integrate([&](double u) { return std::exp(d.log_cdf(u) - ly); }, -kInf, x - d.step(), {}, tail_opts());
  double up = std::max(dr * std::exp(ly) - (x - mu), 0.0);
  return up * dr;
}

// the same tails weighted by w = |Δ^{-ℓ}η|
Tails weighted_tails(const Distribution& d, double x, const Fn& w) {
  Tails t;
  t.up = d.integrate([&](double u) { return w(u) * d.sf(u); }, x, kInf, {}, tail_opts());
  t.dn = d.integrate([&](double u) { return w(u) * d.cdf(u); }, -kInf, x - d.step(), {}, tail_opts());
  return t;
}

// continuous and η monotone: integrate by parts so no derivative of η is needed,
// ∫_x^∞ η' P̄ = -η(x)P̄(x) + ∫_x^∞ η p,  ∫_{-∞}^x η' P = η(x)P(x) - ∫_{-∞}^x η p
Tails weighted_tails_by_parts(const Distribution& d, double x, const SteinContext& ctx) {
  double ex = ctx.eta(x);
  auto ep = [&](double u) {
    double p = d.density(u);
    return p > 0 ? ctx.eta(u) * p : 0.0;
  };
  Tails t;
  t.up = std::fabs(d.integrate(ep, x, kInf, {}, tail_opts()) - ex * d.sf(x));
  t.dn = std::fabs(ex * d.cdf(x) - d.integrate(ep, -kInf, x, {}, tail_opts()));
  return t;
}

FactorBound make(BoundKind k, std::string name, Fn f) {
  FactorBound b;
  b.kind = k;
  b.name = std::move(name);
  b.pointwise = std::move(f);
  return b;
}

FactorBound not_applicable(BoundKind k, std::string reason) {
  FactorBound b;
  b.kind = k;
  b.name = to_string(k);
  b.applicable = false;
  b.reason = std::move(reason);
  b.pointwise = [](double) { return kInf; };
  b.uniform = kInf;
  return b;
}

FactorBound pointwise_min(BoundKind k, std::string name, std::vector<Fn> parts) {
  return make(k, std::move(name), [parts = std::move(parts)](double x) {
    double m = kInf;
    for (const auto& f : parts) m = std::min(m, f(x));
    return m;
  });
}

}  // namespace

std::string to_string(BoundKind k) {
  switch (k) {
    case BoundKind::G_K1: return "G_K1";
    case BoundKind::DG_K1: return "DG_K1";
    case BoundKind::G_K2: return "G_K2";
    case BoundKind::DG_K2: return "DG_K2";
    case BoundKind::G_LIP: return "G_LIP";
    case BoundKind::DG_ETA_K1: return "DG_ETA_K1";
    case BoundKind::DG_ETA_K2: return "DG_ETA_K2";
    case BoundKind::G_MIN: return "G_MIN";
    case BoundKind::DG_MIN: return "DG_MIN";
  }
  return "?";
}

bool bounds_g(BoundKind k) { return k == BoundKind::G_K1 || k == BoundKind::G_K2 || k == BoundKind::G_LIP || k == BoundKind::G_MIN; }

std::vector<double> evaluation_grid(const Distribution& d, int n) {
  std::vector<double> xs;
  if (d.is_lattice()) {
    auto [k0, k1] = d.index_range();
    long stride = std::max(1L, (k1 - k0) / 100000);
    for (long k = k0; k <= k1; k += stride) xs.push_back(d.point(k));
    return xs;
  }
  const double tail = 1e-6;
  double lo = d.quantile(tail), hi = d.quantile(1 - tail);
  for (int i = 0; i < n; ++i) {
    double t = static_cast<double>(i) / (n - 1);
    xs.push_back(lo + t * (hi - lo));
    xs.push_back(d.quantile(tail + t * (1 - 2 * tail)));
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::erase_if(xs, [&](double x) { return !(x > d.lo() && x < d.hi()); });
  return xs;
}

void compute_uniform(FactorBound& b, const Distribution& d, int n, par::Exec exec) {
  if (!b.applicable) return;
  auto xs = evaluation_grid(d, n);
  auto vs = par::map(xs, b.pointwise, exec);
  auto best = par::argmax(xs, vs);
  b.uniform = best.value;
  b.argmax = best.x;
  b.resolution = 0.0;
  if (std::isnan(best.value) || std::isinf(best.value)) {
    b.unbounded = std::isinf(best.value);
    return;
  }
  if (d.is_lattice()) {
    // infinite right tail: steady growth over the last stretch of the lattice
    if (!std::isfinite(d.hi()) && xs.size() > 21) {
      std::size_t m = xs.size() - 1;
      double v0 = vs[m - 20], v1 = vs[m - 10], v2 = vs[m];
      if (v2 > 1.02 * v1 && v1 > 1.02 * v0 && v2 >= b.uniform) {
        b.unbounded = true;
        b.uniform = kInf;
        b.argmax = xs[m];
      }
    }
    return;
  }
  std::size_t i = best.index;
  double a = xs[i > 0 ? i - 1 : i], c = xs[i + 1 < xs.size() ? i + 1 : i];
  b.resolution = std::max(xs[i] - a, c - xs[i]);
  if (c > a) {
    auto [xr, vr] = quad::golden_max(b.pointwise, a, c, 1e-10);
    if (vr > b.uniform) b.uniform = vr, b.argmax = xr;
  }
  // far tails, both sides
  for (int side : {-1, 1}) {
    double prev = kNaN;
    int grows = 0;
    double last = kNaN, lastx = kNaN;
    for (double q : {1e-8, 1e-10, 1e-12, 1e-14}) {
      double x = d.quantile(side < 0 ? q : 1 - q);
      if (!(x > d.lo() && x < d.hi())) break;
      double v = b.pointwise(x);
      if (std::isnan(v)) continue;
      if (!std::isnan(prev) && v > 1.01 * prev && v > 0) ++grows;
      if (v > b.uniform) b.uniform = v, b.argmax = x;
      prev = v;
      last = v;
      lastx = x;
    }
    if (grows == 3 && last >= b.uniform) {
      b.unbounded = true;
      b.uniform = kInf;
      b.argmax = lastx;
    }
  }
}

const FactorBound* find(const std::vector<FactorBound>& v, BoundKind k) {
  for (const auto& b : v)
    if (b.kind == k) return &b;
  return nullptr;
}

std::vector<FactorBound> factor_bounds(const SteinContext& ctx, const TestFunction& h, const FactorOptions& opt) {
  const Distribution& d = ctx.dist();
  const int ell = ctx.ell();
  const double s = d.step(), sa = a_ell(ell) * s, sb = b_ell(ell) * s;
  auto grid = evaluation_grid(d, opt.grid_n);

  std::vector<FactorBound> out;
  const BoundKind all[] = {BoundKind::G_K1, BoundKind::DG_K1, BoundKind::G_K2, BoundKind::DG_K2,
                           BoundKind::G_LIP, BoundKind::DG_ETA_K1, BoundKind::DG_ETA_K2};

  if (auto v = ctx.vanishing_point(grid)) {
    std::ostringstream why;
    why << "c is not positive on the interior (x = " << *v << ")";
    for (auto k : all) out.push_back(not_applicable(k, why.str()));
    return out;
  }

  auto k1 = h.kappa1();
  auto k2 = h.kappa2(d);
  bool finite_mean = std::isfinite(d.mean());

  // c at x + ℓ, zero when that point leaves the support (g vanishes there)
  auto cy = [ctx, d, ell, s](double x) {
    double y = x + ell * s;
    return d.in_support(y) ? ctx.c(y) : 0.0;
  };
  // P(x - b) P̄(x - b) / p(x + ℓ)
  auto mills = [d, ell, s, sb](double x) {
    double y = x + ell * s;
    if (!d.in_support(y)) return 0.0;
    return exp_or_zero(d.log_cdf(x - sb) + d.log_sf(x - sb) - d.log_density(y));
  };

  if (k1) {
    double K = *k1;
    out.push_back(make(BoundKind::G_K1, "G_K1", [=](double x) {
      if (!d.in_support(x)) return 0.0;
      double c = cy(x);
      return c > 0 ? K * mills(x) / c : 0.0;
    }));
    out.push_back(make(BoundKind::DG_K1, "DG_K1", [=](double x) {
      if (!d.in_support(x)) return 0.0;
      double cx = ctx.c(x);
      if (!(cx > 0)) return kInf;
      double c = cy(x);
      double tail = c > 0 ? std::fabs(ctx.Tc(x)) * mills(x) / c : 0.0;
      return K / cx * (1.0 + tail);
    }));
  } else {
    out.push_back(not_applicable(BoundKind::G_K1, "h is not bounded (no κ₁)"));
    out.push_back(not_applicable(BoundKind::DG_K1, "h is not bounded (no κ₁)"));
  }

  if (k2 && finite_mean) {
    double K = *k2;
    auto tau_over_c = [=](double x) {
      double c = cy(x);
      return c > 0 ? d.stein_kernel(ell, x + ell * s) / c : 0.0;
    };
    out.push_back(make(BoundKind::G_K2, "G_K2", [=](double x) {
      if (!d.in_support(x)) return 0.0;
      return K * tau_over_c(x);
    }));
    // E|R(x, X)| = E|X - x|
    out.push_back(make(BoundKind::DG_K2, "DG_K2", [=](double x) {
      if (!d.in_support(x)) return 0.0;
      double cx = ctx.c(x);
      if (!(cx > 0)) return kInf;
      auto t = tails(d, x);
      return K * (t.up + t.dn + std::fabs(ctx.Tc(x)) * tau_over_c(x)) / cx;
    }));
  } else {
    std::string why = !k2 ? "Δh is not bounded (no κ₂)" : "the target has no finite mean";
    out.push_back(not_applicable(BoundKind::G_K2, why));
    out.push_back(not_applicable(BoundKind::DG_K2, why));
  }

  if (!ctx.has_eta()) {
    for (auto k : {BoundKind::G_LIP, BoundKind::DG_ETA_K1, BoundKind::DG_ETA_K2})
      out.push_back(not_applicable(k, "c is not of the form -L η"));
  } else {
    // G_LIP
    std::optional<double> lip = opt.lip_k;
    if (!lip && k2) {
      if (ctx.kind() == CoefKind::Kernel) {
        lip = *k2;
      } else {
        // |x - y| <= sup(1/|Δη|) |η(x) - η(y)|, which needs η strictly monotone
        double inv = 0.0;
        int pos = 0, neg = 0;
        for (double x : grid) {
          double v = ctx.deta(x);
          pos += v > 0;
          neg += v < 0;
          inv = std::max(inv, 1.0 / std::fabs(v));
        }
        // Δη fading in a far tail makes the sup infinite
        for (double q : {1e-12, 1 - 1e-12}) {
          double x = d.quantile(q);
          if (x > d.lo() && x < d.hi() && 1.0 / std::fabs(ctx.deta(x)) > 1.01 * inv) inv = kInf;
        }
        if (pos > 0 && neg > 0) inv = kInf;
        if (std::isfinite(inv)) lip = *k2 * inv;
      }
    }
    if (lip) {
      double k = *lip;
      out.push_back(make(BoundKind::G_LIP, "G_LIP", [=](double x) { return d.in_support(x) ? k : 0.0; }));
    } else {
      out.push_back(not_applicable(BoundKind::G_LIP, "no constant k with |h(x)-h(y)| <= k|η(x)-η(y)|"));
    }

    if (k1) {
      double K = *k1;
      out.push_back(make(BoundKind::DG_ETA_K1, "DG_ETA_K1", [=](double x) {
        if (!d.in_support(x)) return 0.0;
        double cx = ctx.c(x);
        if (!(cx > 0)) return kInf;
        double c = cy(x);
        double tail = 0.0;
        if (c > 0) {
          double y = x + ell * s;
          tail = std::fabs(ctx.Tc(x)) / c * exp_or_zero(d.log_cdf(x - sb) + d.log_sf(x + sa) - d.log_density(y));
        }
        return K / cx * (1.0 + tail);
      }));
    } else {
      out.push_back(not_applicable(BoundKind::DG_ETA_K1, "h is not bounded (no κ₁)"));
    }

    if (k2) {
      double K = *k2;
      bool unit = ctx.kind() == CoefKind::Kernel;
      // sign of Δη on the grid decides whether the by-parts shortcut is valid
      bool monotone = false;
      if (!unit && !d.is_lattice()) {
        int pos = 0, neg = 0;
        for (double x : grid) {
          double v = ctx.deta(x);
          pos += v > 0;
          neg += v < 0;
        }
        monotone = pos == 0 || neg == 0;
      }
      out.push_back(make(BoundKind::DG_ETA_K2, "DG_ETA_K2", [=](double x) {
        if (!d.in_support(x)) return 0.0;
        double cx = ctx.c(x), c = cy(x);
        double y = x + ell * s;
        if (!(cx > 0) || !(c > 0)) return kInf;
        if (unit) return K * 2.0 * tails_product_over_density(d, x, y) / (cx * c);
        double py = d.density(y);
        if (!(py > 0)) return kInf;
        auto t = tails(d, x);
        double num;
        {
          Tails w = monotone ? weighted_tails_by_parts(d, x, ctx)
                             : weighted_tails(d, x, [&](double u) { return std::fabs(ctx.deta(u)); });
          num = t.up * w.dn + t.dn * w.up;
        }
        return K * num / (py * cx * c);
      }));
    } else {
      out.push_back(not_applicable(BoundKind::DG_ETA_K2, "Δh is not bounded (no κ₂)"));
    }
  }

  // pointwise minima of whatever applies
  std::vector<Fn> gs, dgs;
  for (const auto& b : out) {
    if (!b.applicable) continue;
    (bounds_g(b.kind) ? gs : dgs).push_back(b.pointwise);
  }
  if (gs.size() > 1) out.push_back(pointwise_min(BoundKind::G_MIN, "G_MIN", gs));
  if (dgs.size() > 1) out.push_back(pointwise_min(BoundKind::DG_MIN, "DG_MIN", dgs));

  if (opt.uniform)
    for (auto& b : out) compute_uniform(b, d, opt.grid_n, opt.exec);
  return out;
}

// ------------------------------------------------------------------ point mass

namespace {

void require_unit_lattice(const Distribution& d) {
  if (!d.is_lattice() || d.step() != 1.0) throw std::invalid_argument("point-mass factors need a unit lattice");
}

// P(ξ-1)/τ⁺(ξ) and (1-P(ξ))/τ⁻(ξ), with 0/0 read as 0 at the support edges
std::pair<double, double> pm_terms(const Distribution& d, double xi) {
  double lo = d.cdf(xi - 1), hi = d.sf(xi);
  double a = lo == 0.0 ? 0.0 : lo / d.stein_kernel(1, xi);
  double b = hi == 0.0 ? 0.0 : hi / d.stein_kernel(-1, xi);
  return {a, b};
}

}  // namespace

MonotoneCheck monotone_ratio_check(const Distribution& d, double xi) {
  require_unit_lattice(d);
  MonotoneCheck out;
  auto [k0, k1] = d.index_range();
  long kx = d.index(xi);
  auto fail = [&](double x, const char* which) {
    out.pass = false;
    out.violation = x;
    std::ostringstream os;
    os << which << " fails at x = " << x;
    out.diagnostic = os.str();
  };
  // τ⁺(x)p(x) vanishes at the left end of the support; start one point in
  double prev = -kInf;
  for (long k = k0 + 1; k <= std::min(kx, k1); ++k) {
    double x = d.point(k);
    double r = d.cdf(x - 1) / (d.stein_kernel(1, x) * d.pdf(x));
    if (r < prev * (1 - 1e-12)) {
      fail(x, "P(x-1)/(τ⁺(x)p(x)) non-decreasing");
      return out;
    }
    prev = r;
  }
  prev = kInf;
  for (long k = std::max(kx + 1, k0 + 1); k <= k1; ++k) {
    double x = d.point(k);
    double r = d.sf(x - 1) / (d.stein_kernel(1, x) * d.pdf(x));
    if (r > prev * (1 + 1e-12)) {
      fail(x, "(1-P(x-1))/(τ⁺(x)p(x)) non-increasing");
      return out;
    }
    prev = r;
  }
  return out;
}

double pointmass_b(const Distribution& d, double xi) {
  auto [a, b] = pm_terms(d, xi);
  return a + b;
}

DiscretePointMassBounds discrete_pointmass_bounds(const Distribution& d, double xi) {
  require_unit_lattice(d);
  DiscretePointMassBounds out;
  out.check = monotone_ratio_check(d, xi);
  if (!out.check.pass) {
    out.sup_g = out.sup_dg = out.sup_dg_case = out.sup_dg_min = kNaN;
    return out;
  }
  auto [a, b] = pm_terms(d, xi);
  double tp = d.stein_kernel(1, xi), tm = d.stein_kernel(-1, xi);
  double q = 1.0 - d.pdf(xi);
  out.sup_g = std::max(a, b);
  out.sup_dg = a + b;
  double mu = d.mean();
  out.sup_dg_case = xi <= mu ? q / tp : q / tm;
  if (xi == mu) out.sup_dg_case = std::min(q / tp, q / tm);
  out.sup_dg_min = q / std::min(tp, tm);
  return out;
}

BorelBounds discrete_borel_bounds(const Distribution& d, const std::vector<double>& A) {
  require_unit_lattice(d);
  BorelBounds out;
  double mass = 0.0, worst = 0.0, dg = 0.0;
  for (double xi : A) {
    auto c = monotone_ratio_check(d, xi);
    if (!c.pass) {
      out.check = c;
      out.sup_g = out.sup_dg = kNaN;
      return out;
    }
    double p = d.pdf(xi);
    mass += p;
    worst = std::max({worst, 1.0 / (d.stein_kernel(1, xi) * p), 1.0 / (d.stein_kernel(-1, xi) * p)});
    dg = std::max(dg, pointmass_b(d, xi));
  }
  out.sup_g = mass * worst;
  out.sup_dg = dg;
  return out;
}

// ---------------------------------------------------------------- specialised

namespace {

using Curves = std::vector<FactorBound>;

// M(z) = P(z) P̄(z) / p(z) on a unit lattice, 0 off the support
Fn lattice_m(const Distribution& d) {
  return [d](double z) {
    if (!d.in_support(z)) return 0.0;
    return exp_or_zero(d.log_cdf(z) + d.log_sf(z) - d.log_pdf(z));
  };
}

Curves normal_curves(const Distribution& d, Standardization st, double k1, double k2) {
  double mu = d.params()[0], s2 = d.params()[1] * d.params()[1];
  auto M = [d](double x) { return d.mills(0, x); };
  auto Mt = [d](double x) { return d.mtilde(0, x); };
  // the kernel choice c = σ² only rescales the c = 1 curves
  double c = st == Standardization::One ? 1.0 : s2;
  Curves v;
  v.push_back(make(BoundKind::G_K1, "normal:g_k1", [=](double x) { return k1 * M(x) / c; }));
  v.push_back(make(BoundKind::G_K2, "normal:g_k2", [=](double) { return k2 * s2 / c; }));
  v.push_back(make(BoundKind::DG_K1, "normal:dg_k1",
                   [=](double x) { return k1 / c * (1 + std::fabs(x - mu) / s2 * M(x)); }));
  v.push_back(make(BoundKind::DG_K2, "normal:dg_k2_printed", [=](double x) { return 2 * k2 * std::fabs(x - mu) / c; }));
  v.push_back(make(BoundKind::DG_ETA_K2, "normal:dg_eta_k2", [=](double x) { return 2 * k2 * Mt(x) / (s2 * c); }));
  v.push_back(pointwise_min(BoundKind::G_MIN, "normal:g_min", {v[0].pointwise, v[1].pointwise}));
  return v;
}

Curves exponential_curves(const Distribution& d, Standardization st, double k1, double k2) {
  double lam = d.params()[0];
  Curves v;
  if (st == Standardization::One) {
    v.push_back(make(BoundKind::G_K1, "exponential:g1_k1", [=](double x) { return k1 * -std::expm1(-lam * x) / lam; }));
    v.push_back(make(BoundKind::G_K2, "exponential:g1_k2", [=](double x) { return k2 * x / lam; }));
    v.push_back(make(BoundKind::DG_K1, "exponential:dg1_k1", [=](double x) { return k1 * (2 - std::exp(-lam * x)); }));
    v.push_back(make(BoundKind::DG_K2, "exponential:dg1_k2_printed",
                     [=](double x) { return k2 * (std::fabs(x - lam) + x); }));
  } else {
    auto Mt = [d](double x) { return d.mtilde(0, x); };
    v.push_back(make(BoundKind::G_K1, "exponential:g2_k1", [=](double x) { return k1 * -std::expm1(-lam * x) / x; }));
    v.push_back(make(BoundKind::G_K2, "exponential:g2_k2", [=](double) { return k2; }));
    v.push_back(make(BoundKind::DG_K1, "exponential:dg2_k1", [=](double x) {
      return k1 * lam / x * (1 + std::fabs(x - 1 / lam) * -std::expm1(-lam * x) / x);
    }));
    v.push_back(make(BoundKind::DG_K2, "exponential:dg2_k2_printed",
                     [=](double x) { return 2 * k2 * std::fabs(lam - 1 / x); }));
    v.push_back(make(BoundKind::DG_ETA_K2, "exponential:dg2_eta_k2",
                     [=](double x) { return 2 * k2 / x * (1 - -std::expm1(-lam * x) / (lam * x)); }));
    v.push_back(make(BoundKind::DG_ETA_K2, "exponential:dg2_eta_k2_mtilde",
                     [=](double x) { return 2 * k2 * lam * lam / (x * x) * Mt(x); }));
  }
  v.push_back(pointwise_min(BoundKind::G_MIN, st == Standardization::One ? "exponential:g1_min" : "exponential:g2_min",
                            {v[0].pointwise, v[1].pointwise}));
  return v;
}

Curves gamma_curves(const Distribution& d, Standardization st, double k1, double k2) {
  double r = d.params()[0], lam = d.params()[1];
  auto M = [d](double x) { return d.mills(0, x); };
  auto Mt = [d](double x) { return d.mtilde(0, x); };
  Curves v;
  if (st == Standardization::One) {
    v.push_back(make(BoundKind::G_K1, "gamma:g1_k1", [=](double x) { return k1 * M(x); }));
    v.push_back(make(BoundKind::G_K2, "gamma:g1_k2", [=](double x) { return k2 * x / lam; }));
    v.push_back(make(BoundKind::DG_K1, "gamma:dg1_k1",
                     [=](double x) { return k1 * (1 + std::fabs((r - 1) / x - lam) * M(x)); }));
    v.push_back(make(BoundKind::DG_K2, "gamma:dg1_k2_printed",
                     [=](double x) { return k2 * (std::fabs(x - r / lam) + std::fabs(x - (r - 1) / lam)); }));
  } else {
    v.push_back(make(BoundKind::G_K1, "gamma:g2_k1", [=](double x) { return k1 * M(x) * lam / x; }));
    v.push_back(make(BoundKind::G_K2, "gamma:g2_k2", [=](double) { return k2; }));
    v.push_back(make(BoundKind::DG_K1, "gamma:dg2_k1", [=](double x) {
      return k1 * lam / x * (1 + std::fabs(x - r / lam) * lam / x * M(x));
    }));
    v.push_back(make(BoundKind::DG_K2, "gamma:dg2_k2_printed",
                     [=](double x) { return 2 * k2 * lam / x * std::fabs(x - r / lam); }));
    v.push_back(make(BoundKind::DG_ETA_K2, "gamma:dg2_eta_k2",
                     [=](double x) { return 2 * k2 * lam * lam / (x * x) * Mt(x); }));
  }
  return v;
}

Curves beta_curves(const Distribution& d, Standardization st, double k1, double k2) {
  double a = d.params()[0], b = d.params()[1], ab = a + b;
  auto M = [d](double x) { return d.mills(0, x); };
  auto Mt = [d](double x) { return d.mtilde(0, x); };
  Curves v;
  if (st == Standardization::One) {
    v.push_back(make(BoundKind::G_K1, "beta:g1_k1", [=](double x) { return k1 * M(x); }));
    v.push_back(make(BoundKind::G_K2, "beta:g1_k2", [=](double x) { return k2 * x * (1 - x) / ab; }));
    v.push_back(make(BoundKind::DG_K1, "beta:dg1_k1", [=](double x) {
      return k1 * (1 + std::fabs(a - 1 - x * (ab - 2)) / (x * (1 - x)) * M(x));
    }));
    v.push_back(make(BoundKind::DG_K2, "beta:dg1_k2_printed", [=](double x) {
      return k2 * (std::fabs(x - a / ab) + std::fabs(x * (1 - 2 / ab) - (a - 1) / ab));
    }));
  } else {
    v.push_back(make(BoundKind::G_K1, "beta:g2_k1", [=](double x) { return k1 * ab / (x * (1 - x)) * M(x); }));
    v.push_back(make(BoundKind::G_K2, "beta:g2_k2", [=](double) { return k2; }));
    // as printed: the mills factor and one power of (α+β) are absent
    v.push_back(make(BoundKind::DG_K1, "beta:dg2_k1_printed", [=](double x) {
      double q = x * (1 - x);
      return k1 * ab / q * (1 + std::fabs(a / ab - x) / q);
    }));
    v.push_back(make(BoundKind::DG_K2, "beta:dg2_k2_printed",
                     [=](double x) { return 2 * k2 * ab / (x * (1 - x)) * std::fabs(x - a / ab); }));
    v.push_back(make(BoundKind::DG_ETA_K2, "beta:dg2_eta_k2", [=](double x) {
      double q = x * (1 - x);
      return 2 * k2 * ab * ab / (q * q) * Mt(x);
    }));
  }
  return v;
}

Curves student_curves(const Distribution& d, Standardization st, double k1, double k2) {
  double nu = d.params()[0];
  auto M = [d](double x) { return d.mills(0, x); };
  auto Mt = [d](double x) { return d.mtilde(0, x); };
  Curves v;
  if (st == Standardization::One) {
    v.push_back(make(BoundKind::G_K1, "student:g1_k1", [=](double x) { return k1 * M(x); }));
    v.push_back(make(BoundKind::G_K2, "student:g1_k2", [=](double x) { return k2 * (x * x + nu) / (nu - 1); }));
    v.push_back(make(BoundKind::DG_K1, "student:dg1_k1",
                     [=](double x) { return k1 * (1 + std::fabs(x) * (nu + 1) / (x * x + nu) * M(x)); }));
    v.push_back(make(BoundKind::DG_K2, "student:dg1_k2_printed",
                     [=](double x) { return k2 * std::fabs(x) * 2 * nu / (nu - 1); }));
  } else {
    auto w = [nu](double x) { return (nu - 1) / (x * x + nu); };
    v.push_back(make(BoundKind::G_K1, "student:g2_k1", [=](double x) { return k1 * M(x) * w(x); }));
    v.push_back(make(BoundKind::G_K2, "student:g2_k2", [=](double) { return k2; }));
    v.push_back(make(BoundKind::DG_K1, "student:dg2_k1",
                     [=](double x) { return k1 * w(x) * (1 + std::fabs(x) * w(x) * M(x)); }));
    v.push_back(make(BoundKind::DG_K2, "student:dg2_k2_printed", [=](double x) { return 2 * k2 * std::fabs(x) * w(x); }));
    v.push_back(make(BoundKind::DG_ETA_K2, "student:dg2_eta_k2", [=](double x) { return 2 * k2 * w(x) * w(x) * Mt(x); }));
  }
  return v;
}

Curves frechet_curves(const Distribution& d, double k1) {
  double a = d.params()[0];
  Curves v;
  v.push_back(make(BoundKind::G_K1, "frechet:g2_k1", [=](double x) { return k1 * -std::expm1(-std::pow(x, -a)) / a; }));
  v.push_back(make(BoundKind::DG_K1, "frechet:dg2_k1", [=](double x) {
    return k1 * std::pow(x, -a - 1) * (1 + -std::expm1(-std::pow(x, -a)));
  }));
  return v;
}

Curves rayleigh_curves(const Distribution& d, double k1, double k2) {
  const double mean = std::sqrt(std::numbers::pi) / 2;
  auto tau = [d](double x) { return d.stein_kernel(0, x); };
  auto M = [](double x) { return -std::expm1(-x * x) / (2 * x); };
  Curves v;
  v.push_back(make(BoundKind::G_K1, "rayleigh:g1_k1", [=](double x) { return k1 * M(x); }));
  // printed with the sign of the kernel flipped; |τ| is what the bound means
  v.push_back(make(BoundKind::G_K2, "rayleigh:g1_k2", [=](double x) { return k2 * std::fabs(tau(x)); }));
  v.push_back(make(BoundKind::G_K2, "rayleigh:g1_k2_half", [=](double) { return k2 / 2; }));
  v.push_back(make(BoundKind::DG_K1, "rayleigh:dg1_k1_printed", [=](double x) { return k1 * (1 + tau(x) * M(x)); }));
  v.push_back(make(BoundKind::DG_K1, "rayleigh:dg1_k1_printed_half", [=](double x) { return k1 * (1 + M(x) / 2); }));
  v.push_back(make(BoundKind::DG_K2, "rayleigh:dg1_k2_printed", [=](double x) {
    return k2 * (std::fabs(x - mean) + std::fabs(1 / x - 2 * x) * tau(x));
  }));
  v.push_back(make(BoundKind::DG_K2, "rayleigh:dg1_k2_printed_half", [=](double x) {
    return k2 * (std::fabs(x - mean) + 0.5 * std::fabs(1 / x - 2 * x));
  }));
  return v;
}

Curves poisson_curves(const Distribution& d, double k1, double k2) {
  double lam = d.params()[0];
  auto M = lattice_m(d);
  auto pmf = [d](double x) { return d.pdf(x); };
  Curves v;
  // g⁻ with c = λ
  v.push_back(make(BoundKind::G_K1, "poisson:g_k1", [=](double x) {
    if (x < 1) return 0.0;
    return k1 * exp_or_zero(d.log_cdf(x - 1) + d.log_sf(x - 1) - std::log(lam) - d.log_pdf(x - 1));
  }));
  v.push_back(make(BoundKind::G_K2, "poisson:g_k2", [=](double) { return k2; }));
  v.push_back(pointwise_min(BoundKind::G_MIN, "poisson:g_min", {v[0].pointwise, v[1].pointwise}));
  // Δg
  v.push_back(make(BoundKind::DG_K1, "poisson:dg_k1", [=](double x) {
    double a = 1 / lam + std::fabs(x - lam) / (lam * lam) * (x >= 1 ? M(x - 1) : 0.0);
    double b = x > 0 ? 1 / x + std::fabs(x - lam) / (x * (x + 1)) * exp_or_zero(d.log_cdf(x) + d.log_sf(x) - d.log_pdf(x + 1))
                     : kInf;
    return k1 * std::min(a, b);
  }));
  // Δg, three-term form; the first two terms come from the printed DG_K2 form
  auto third = [=](double x) {
    if (x < 1) return 0.0;
    double lo = 0.0, hi = 0.0;
    for (long j = 0; j <= static_cast<long>(x) - 1; ++j) lo += d.cdf(j);
    auto [k0, kl] = d.index_range();
    (void)k0;
    for (long j = kl; j >= static_cast<long>(x); --j) hi += d.sf(j);
    return lo * hi / (lam * x * pmf(x));
  };
  v.push_back(make(BoundKind::DG_ETA_K2, "poisson:dg_tail_printed", [=](double x) { return 2 * k2 * third(x); }));
  v.push_back(make(BoundKind::DG_MIN, "poisson:dg_min_printed", [=](double x) {
    double t1 = std::fabs(x - lam) / lam;
    double t2 = x > 0 ? std::fabs(x - lam) / x : kInf;
    return 2 * k2 * std::min({t1, t2, third(x)});
  }));
  return v;
}

Curves binomial_curves(const Distribution& d, int ell, Standardization st, double k1, double k2) {
  double n = d.params()[0], th = d.params()[1];
  auto M = lattice_m(d);
  Curves v;
  if (st == Standardization::One) {
    if (ell == -1) {
      v.push_back(make(BoundKind::G_K1, "binomial:g1m_k1", [=](double x) { return k1 * M(x - 1); }));
      v.push_back(make(BoundKind::G_K2, "binomial:g1m_k2", [=](double x) { return k2 * th * (n - x + 1); }));
      v.push_back(make(BoundKind::DG_K1, "binomial:dg1m_k1", [=](double x) {
        return k1 * (1 + std::fabs(((n + 1) * th - x) / (th * (n - x + 1))) * M(x - 1));
      }));
      v.push_back(make(BoundKind::DG_K2, "binomial:dg1m_k2_printed",
                       [=](double x) { return k2 * (std::fabs(x - n * th) + std::fabs(x - (n + 1) * th)); }));
    } else {
      v.push_back(make(BoundKind::G_K1, "binomial:g1p_k1", [=](double x) {
        return x >= n ? 0.0 : k1 * M(x) * (x + 1) * (1 - th) / (th * (n - x));
      }));
      v.push_back(make(BoundKind::G_K2, "binomial:g1p_k2", [=](double x) { return k2 * (1 - th) * (x + 1); }));
      v.push_back(make(BoundKind::DG_K1, "binomial:dg1p_k1", [=](double x) {
        if (x >= n) return k1;
        return k1 * (1 + std::fabs(((n + 1) * th - (x + 1)) / (th * (n - x))) * M(x));
      }));
      v.push_back(make(BoundKind::DG_K2, "binomial:dg1p_k2_printed",
                       [=](double x) { return k2 * (std::fabs(x - n * th) + std::fabs(x + 1 - (n + 1) * th)); }));
    }
    return v;
  }
  // τ standardisation, written for g₂⁺; the Δg₂ curves serve both directions
  v.push_back(make(BoundKind::G_K1, "binomial:g2_k1",
                   [=](double x) { return x >= n ? 0.0 : k1 * M(x) / (th * (n - x)); }));
  v.push_back(make(BoundKind::G_K2, "binomial:g2_k2", [=](double) { return k2; }));
  v.push_back(make(BoundKind::DG_K1, "binomial:dg2_k1", [=](double x) {
    double a = x < n ? 1 / (th * (n - x)) * (1 + std::fabs(x - n * th) * M(x - 1) / (th * (n - x + 1))) : kInf;
    double b = x > 0 ? 1 / ((1 - th) * x) * (1 + (x < n ? std::fabs(x - n * th) * M(x) / (th * (n - x)) : 0.0)) : kInf;
    return k1 * std::min(a, b);
  }));
  v.push_back(make(BoundKind::DG_K2, "binomial:dg2_k2_printed", [=](double x) {
    double a = x < n ? 1 / (th * (n - x)) : kInf, b = x > 0 ? 1 / ((1 - th) * x) : kInf;
    return 2 * k2 * std::fabs(x - n * th) * std::min(a, b);
  }));
  v.push_back(make(BoundKind::DG_ETA_K2, "binomial:dg2_eta_k2_printed", [=](double x) {
    double a = x < n ? d.mtilde(-1, x) / (th * th * (n - x) * (n - x + 1)) : kInf;
    double b = x > 0 ? d.mtilde(1, x) / ((1 - th) * (1 - th) * x * (x + 1)) : kInf;
    return 2 * k2 * std::min(a, b);
  }));
  return v;
}

Curves negbinomial_curves(const Distribution& d, int ell, Standardization st, double k1, double k2) {
  double r = d.params()[0], th = d.params()[1];
  double mean = th * r / (1 - th);
  auto M = lattice_m(d);
  Curves v;
  if (st == Standardization::One) {
    if (ell == -1) {
      v.push_back(make(BoundKind::G_K1, "negbinomial:g1m_k1", [=](double x) { return k1 * M(x - 1); }));
      v.push_back(make(BoundKind::G_K2, "negbinomial:g1m_k2",
                       [=](double x) { return k2 * th * (r + x - 1) / (1 - th); }));
      v.push_back(make(BoundKind::DG_K1, "negbinomial:dg1m_k1", [=](double x) {
        return k1 * (1 + std::fabs(1 - x / (th * (x - 1 + r))) * M(x - 1));
      }));
      v.push_back(make(BoundKind::DG_K2, "negbinomial:dg1m_k2_printed", [=](double x) {
        return k2 * (std::fabs(x - mean) + std::fabs(x - th * (r - 1) / (1 - th)));
      }));
    } else {
      v.push_back(make(BoundKind::G_K1, "negbinomial:g1p_k1_printed",
                       [=](double x) { return k1 * M(x) * (x + r) * th / (x + 1); }));
      v.push_back(make(BoundKind::G_K2, "negbinomial:g1p_k2", [=](double x) { return k2 * (x + 1) / (1 - th); }));
      v.push_back(make(BoundKind::DG_K1, "negbinomial:dg1p_k1", [=](double x) {
        return k1 * (1 + std::fabs(x * (1 - th) + 1 - r * th) / (th * (r + x)) * M(x));
      }));
      v.push_back(make(BoundKind::DG_K2, "negbinomial:dg1p_k2_printed", [=](double x) {
        return k2 * (std::fabs(x - mean) + std::fabs(x - (1 - r * th) / (1 - th)));
      }));
    }
    return v;
  }
  v.push_back(make(BoundKind::G_K1, "negbinomial:g2_k1",
                   [=](double x) { return k1 * M(x) * (1 - th) / (th * (x + r)); }));
  v.push_back(make(BoundKind::G_K2, "negbinomial:g2_k2", [=](double) { return k2; }));
  v.push_back(make(BoundKind::DG_K1, "negbinomial:dg2_k1_minus", [=](double x) {
    return k1 * (1 - th) / (th * (r + x)) * (1 + std::fabs(((1 - th) * x - th * r) / (th * (r + x - 1))) * M(x - 1));
  }));
  v.push_back(make(BoundKind::DG_K1, "negbinomial:dg2_k1_plus", [=](double x) {
    if (x <= 0) return kInf;
    return k1 * (1 - th) / x * (1 + std::fabs((1 - th) * x - th * r) / (th * (r + x)) * M(x));
  }));
  v.push_back(make(BoundKind::DG_K2, "negbinomial:dg2_k2_printed", [=](double x) {
    double b = x > 0 ? 1 / x : kInf;
    return 2 * k2 * std::fabs((1 - th) * x - r * th) * std::min(1 / (th * (r + x)), b);
  }));
  v.push_back(make(BoundKind::DG_ETA_K2, "negbinomial:dg2_eta_k2_printed", [=](double x) {
    double a = d.mtilde(-1, x) / (th * th * (r + x) * (r + x - 1));
    double b = x > 0 ? d.mtilde(1, x) / (x * (x + 1)) : kInf;
    return 2 * k2 * (1 - th) * (1 - th) * std::min(a, b);
  }));
  return v;
}

}  // namespace

std::vector<SpecializedSet> specialized_bounds(const Distribution& d, Standardization st, double kappa1,
                                               double kappa2, const FactorOptions& opt) {
  std::vector<SpecializedSet> out;
  auto ctx_for = [&](int ell) {
    return st == Standardization::One ? SteinContext::one(d, ell) : SteinContext::kernel(d, ell);
  };
  switch (d.family()) {
    case Family::Normal: out.push_back({ctx_for(0), normal_curves(d, st, kappa1, kappa2)}); break;
    case Family::Exponential: out.push_back({ctx_for(0), exponential_curves(d, st, kappa1, kappa2)}); break;
    case Family::Gamma: out.push_back({ctx_for(0), gamma_curves(d, st, kappa1, kappa2)}); break;
    case Family::Beta: out.push_back({ctx_for(0), beta_curves(d, st, kappa1, kappa2)}); break;
    case Family::StudentT: out.push_back({ctx_for(0), student_curves(d, st, kappa1, kappa2)}); break;
    case Family::Frechet:
      // neither c = 1 nor c = τ has closed curves; the printed choice is c = x^{α+1}
      if (st == Standardization::Kernel) {
        double a = d.params()[0];
        auto ctx = SteinContext::custom(
            d, 0, [a](double x) { return x > 0 ? std::pow(x, a + 1) : 0.0; }, [a](double) { return a; }, "x^(a+1)");
        out.push_back({ctx, frechet_curves(d, kappa1)});
      }
      break;
    case Family::Rayleigh:
      if (st == Standardization::One) out.push_back({ctx_for(0), rayleigh_curves(d, kappa1, kappa2)});
      break;
    case Family::Poisson:
      if (st == Standardization::Kernel) out.push_back({ctx_for(-1), poisson_curves(d, kappa1, kappa2)});
      break;
    case Family::Binomial:
      if (st == Standardization::One) {
        for (int ell : {-1, 1}) out.push_back({ctx_for(ell), binomial_curves(d, ell, st, kappa1, kappa2)});
      } else {
        out.push_back({ctx_for(1), binomial_curves(d, 1, st, kappa1, kappa2)});
      }
      break;
    case Family::NegBinomial:
      if (st == Standardization::One) {
        for (int ell : {-1, 1}) out.push_back({ctx_for(ell), negbinomial_curves(d, ell, st, kappa1, kappa2)});
      } else {
        out.push_back({ctx_for(1), negbinomial_curves(d, 1, st, kappa1, kappa2)});
      }
      break;
    default: break;
  }
  for (auto& set : out)
    for (auto& b : set.curves) compute_uniform(b, d, opt.grid_n, opt.exec);
  return out;
}

void write_csv(std::ostream& os, const std::vector<FactorBound>& bounds, const std::vector<double>& xs, bool header) {
  if (header) os << "x,bound_kind,value\n";
  auto old = os.precision(12);
  for (const auto& b : bounds) {
    if (!b.applicable) continue;
    for (double x : xs) os << x << ',' << b.name << ',' << b.pointwise(x) << '\n';
  }
  os.precision(old);
}

}  // namespace stein
