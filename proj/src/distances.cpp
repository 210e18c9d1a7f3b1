#include "stein/distances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "stein/factors.hpp"
#include "stein/oracles.hpp"

namespace stein {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

quad::Options tight() {
  quad::Options o;
  o.abs_tol = 1e-13;
  o.rel_tol = 1e-11;
  o.max_intervals = 8000;
  return o;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

// E_n f over the approximating law
double En(const Distribution& n, const Fn& f, std::vector<double> breaks = {}) {
  return n.expect(f, breaks, tight());
}

std::vector<double> support_breaks(const Distribution& t, const TestFunction* h = nullptr) {
  std::vector<double> b;
  for (double c : {t.lo(), t.hi()})
    if (std::isfinite(c)) b.push_back(c);
  if (h)
    for (double c : h->breaks()) b.push_back(c);
  return b;
}

// P_n(X ∉ S_∞)
double mass_outside(const Distribution& n, const Distribution& t) {
  double half = 0.5 * n.step();
  double m = 0.0;
  if (std::isfinite(t.lo())) m += n.cdf(t.lo() - (n.is_lattice() ? half : 0.0));
  if (std::isfinite(t.hi())) m += n.sf(t.hi());
  return m;
}

// ------------------------------------------------------------ endpoint limits

using LogFn = std::function<std::pair<double, double>(double)>;  // x -> (log|F|, sign)

double common_lo(const ComparisonProblem& p) { return std::max(p.approx.lo(), p.target.lo()); }
double common_hi(const ComparisonProblem& p) { return std::min(p.approx.hi(), p.target.hi()); }

double inner_point(const ComparisonProblem& p) {
  double a = common_lo(p), b = common_hi(p);
  if (std::isfinite(a) && std::isfinite(b)) return 0.5 * (a + b);
  for (const auto* d : {&p.target, &p.approx}) {
    double m = d->quantile(0.5);
    if (m > a && m < b) return m;
  }
  return std::isfinite(a) ? a + 1.0 : b - 1.0;
}

LimitTrace endpoint_limit(const ComparisonProblem& p, bool upper, const LogFn& F) {
  LimitTrace tr;
  tr.upper = upper;
  double e = upper ? common_hi(p) : common_lo(p);
  tr.endpoint = e;
  double x0 = inner_point(p);
  double sign = 1.0;
  double prev = kNaN;
  int zeros = 0;
  for (int k = 0; k < 1200; ++k) {
    double x;
    if (std::isfinite(e)) {
      x = e + (x0 - e) * std::ldexp(1.0, -k);
      if (x == e || x == prev || std::fabs(x - e) < 1e-280) break;
    } else {
      x = x0 + (upper ? 1.0 : -1.0) * (1.0 + std::fabs(x0)) * std::ldexp(1.0, k);
      if (std::fabs(x) > 1e15) break;
    }
    if (p.approx.is_lattice()) {
      x = p.approx.point(p.approx.index(x));
      if (x == prev) continue;
    }
    prev = x;
    auto [lv, sg] = F(x);
    if (std::isnan(lv)) continue;
    tr.points.emplace_back(x, lv);
    if (lv == kInf) break;
    if (lv == -kInf) {
      // a single exact zero right at the endpoint can be cancellation; three in a row is not
      if (++zeros == 3) break;
      continue;
    }
    zeros = 0;
    sign = sg;
    // far out, log differences of huge terms lose precision: stop once the trend is settled
    std::size_t m = tr.points.size();
    if (m >= 12 && lv < -40) {
      bool dec = true;
      for (std::size_t i = m - 11; i < m; ++i) dec = dec && tr.points[i].second < tr.points[i - 1].second;
      if (dec) break;
    }
  }
  auto fail = [&](const std::string& why) {
    tr.verdict = why;
    std::ostringstream os;
    os << "endpoint limit at " << e << ": " << why;
    throw KappaError(os.str(), tr);
  };
  if (tr.points.empty()) fail("no finite evaluations");
  if (tr.points.back().second == kInf || tr.points.back().second > 700) fail("diverges");
  std::vector<double> fin;
  for (auto& [x, lv] : tr.points)
    if (std::isfinite(lv)) fin.push_back(lv);
  auto plateau = [&](const std::vector<double>& v) -> std::optional<double> {
    // four consecutive halvings that no longer move the value
    for (std::size_t i = 0; i + 4 < v.size(); ++i) {
      bool flat = true;
      for (std::size_t j = i; j < i + 4; ++j)
        flat = flat && std::fabs(v[j + 1] - v[j]) < 1e-7 * std::max(1.0, std::fabs(v[j + 1]));
      if (flat) return v[i + 4];
    }
    return std::nullopt;
  };
  if (tr.points.back().second == -kInf) {
    std::size_t f = fin.size();
    bool falling = f < 3 || (fin[f - 1] < fin[f - 2] && fin[f - 2] < fin[f - 3]);
    if (falling) {
      tr.verdict = "vanishes";
      return tr;
    }
    if (auto pv = plateau(fin)) {
      tr.value = sign * std::exp(*pv);
      tr.verdict = "converged";
      return tr;
    }
    fail("no numerical limit");
  }
  std::size_t m = std::min<std::size_t>(12, fin.size());
  if (m < 4) fail("too few evaluations");
  std::vector<double> v(fin.end() - m, fin.end()), dv;
  for (std::size_t i = 1; i < v.size(); ++i) dv.push_back(v[i] - v[i - 1]);
  bool decreasing = std::all_of(dv.begin(), dv.end(), [](double d) { return d < 0; });
  if (decreasing && v.back() < -40) {
    tr.verdict = "below -40";
    return tr;
  }
  if (std::all_of(dv.begin(), dv.end(), [](double d) { return d < -1e-6; }) &&
      std::fabs(dv.back()) > 0.1 * std::fabs(dv.front())) {
    tr.verdict = "power-law decay";
    return tr;
  }
  double last = 0.0;
  for (std::size_t i = dv.size() - 4; i < dv.size(); ++i) last = std::max(last, std::fabs(dv[i]));
  if (last < 1e-7 * std::max(1.0, std::fabs(v.back()))) {
    tr.value = sign * std::exp(v.back());
    tr.verdict = "converged";
    return tr;
  }
  if (std::all_of(dv.begin(), dv.end(), [](double d) { return d > 0; })) fail("diverges");
  fail("no numerical limit");
  return tr;
}

std::pair<double, double> log_abs(double v) { return {v == 0.0 ? -kInf : std::log(std::fabs(v)), v < 0 ? -1.0 : 1.0}; }

// ------------------------------------------------------- the identity core

// h - E_∞h = (T_∞c₁ - T_n c₂) g + (c₁ Δ_∞ g - c₂ Δ_n^{-ℓ} g) + T_n(c₂ g(· - ℓ)) on S_n ∩ S_∞
struct Parts {
  double drift = 0, coef = 0, boundary = 0, outside = 0;
  std::vector<LimitTrace> traces;
};

Parts identity_parts(const ComparisonProblem& p, int ell_n, const Coefficient& c2, const SteinContext& ctx1,
                     const TestFunction& h, bool main_terms) {
  const Distribution& n = p.approx;
  const Distribution& t = ctx1.dist();
  SteinSolution sol(ctx1, h);
  const double sn = n.step();
  auto in_t = [&](double x) { return t.in_support(x); };
  // Δ_n^{-ℓ} g
  auto dn = [&](double x) {
    if (!n.is_lattice()) return sol.dg(x);
    return (sol.g(x) - sol.g(x - ell_n * sn)) / (ell_n * sn);
  };
  Parts out;
  auto breaks = support_breaks(t, &h);
  if (main_terms) {
    out.drift = En(n, [&](double x) {
      if (!in_t(x)) return 0.0;
      double g = sol.g(x);
      return g == 0.0 ? 0.0 : (ctx1.Tc(x) - c2.Tc(x)) * g;
    }, breaks);
    out.coef = En(n, [&](double x) {
      if (!in_t(x)) return 0.0;
      double a = ctx1.c(x) * sol.dg(x);
      double b = c2.c(x) * dn(x);
      return a - b;
    }, breaks);
    double mh = sol.mean_h();
    out.outside = En(n, [&](double x) { return in_t(x) ? 0.0 : h(x) - mh; }, breaks);
  }
  // f = c₂ g(· - ℓ); E_n[T_n f] telescopes to the endpoints of S_n ∩ S_∞
  auto f = [&](double x) {
    double g = sol.g(x - ell_n * sn);
    return g == 0.0 ? 0.0 : c2.c(x) * g;
  };
  if (n.is_lattice()) {
    // Σ over S_n ∩ S_∞ of T_n f p_n telescopes to u(hi + a_ℓ) - u(lo - b_ℓ), u = f p_n; summing the
    // differences instead leaves ~1e-17 of cancellation noise on top of values that can be 1e-70
    auto u = [&](double x) {
      double fx = f(x);
      return fx == 0.0 ? 0.0 : fx * n.density(x);
    };
    auto F = [&](double x) {
      auto [lf, sg] = log_abs(f(x));
      return std::pair{lf + n.log_density(x), sg};
    };
    double a = common_lo(p), b = common_hi(p), up = 0.0, lo = 0.0;
    if (std::isfinite(b)) {
      up = u(n.point(n.index(b) + a_ell(ell_n)));
    } else {
      auto tr = endpoint_limit(p, true, F);
      up = tr.value;
      out.traces.push_back(tr);
    }
    if (std::isfinite(a)) {
      lo = u(n.point(n.index(a) - b_ell(ell_n)));
    } else {
      auto tr = endpoint_limit(p, false, F);
      lo = tr.value;
      out.traces.push_back(tr);
    }
    out.boundary = up - lo;
  } else {
    auto F = [&](double x) {
      auto [lf, sg] = log_abs(f(x));
      return std::pair{lf + n.log_density(x), sg};
    };
    auto up = endpoint_limit(p, true, F);
    auto lo = endpoint_limit(p, false, F);
    out.boundary = up.value - lo.value;
    out.traces = {up, lo};
  }
  return out;
}

void require_same_measure(const ComparisonProblem& p) {
  if (!same_measure(p.approx, p.target))
    throw std::invalid_argument("score/kernel comparison needs both laws on the same dominating measure");
}

// ------------------------------------------------------------------ helpers

std::vector<std::pair<std::string, double>> problem_params(const ComparisonProblem& p) {
  std::vector<std::pair<std::string, double>> out;
  const auto& a = p.approx.params();
  const auto& b = p.target.params();
  for (std::size_t i = 0; i < a.size(); ++i) out.emplace_back("approx_" + std::to_string(i), a[i]);
  for (std::size_t i = 0; i < b.size(); ++i) out.emplace_back("target_" + std::to_string(i), b[i]);
  out.emplace_back("ell", p.ell);
  return out;
}

BoundReport start_report(const ComparisonProblem& p) {
  BoundReport r;
  r.metric = p.metric;
  r.method = p.method;
  r.direction = p.direction();
  r.ell = p.ell;
  r.params = problem_params(p);
  return r;
}

void attach_oracle(BoundReport& r, const ComparisonProblem& p, const BoundOptions& opt) {
  if (!opt.oracle) return;
  switch (r.metric) {
    case Metric::Kolmogorov: r.oracle = exact_kolmogorov(p.approx, p.target).value; break;
    case Metric::TV: r.oracle = exact_tv(p.approx, p.target).value; break;
    case Metric::Wasserstein: r.oracle = exact_wasserstein(p.approx, p.target).value; break;
  }
  r.dominates_oracle = r.bound + 1e-9 >= *r.oracle;
}

KappaKind kappa_kind_for(const ComparisonProblem& p) {
  bool lat = p.target.is_lattice();
  if (p.method == Method::KernelDiff) return lat ? KappaKind::KappaIdPm : KappaKind::KappaId;
  return lat ? KappaKind::Kappa1StarPm : KappaKind::Kappa1Star;
}

FactorBound envelope(const SteinContext& ctx, const TestFunction& h, BoundKind kind) {
  FactorOptions fo;
  fo.uniform = false;
  auto all = factor_bounds(ctx, h, fo);
  const FactorBound* b = find(all, kind);
  if (!b || !b->applicable)
    throw std::invalid_argument("factor envelope " + to_string(kind) + " not applicable: " + (b ? b->reason : ""));
  return *b;
}

// |difference| × envelope; points where the difference vanishes contribute 0 even if the envelope is infinite
double weighted_mean(const Distribution& n, const Distribution& t, const Fn& diff, const FactorBound& env) {
  return En(n, [&](double x) {
    if (!t.in_support(x)) return 0.0;
    // a continuous target's endpoints are null for X_n too (quadrature may hit them as breaks)
    if (!t.is_lattice() && (x == t.lo() || x == t.hi())) return 0.0;
    double d = std::fabs(diff(x));
    if (d == 0.0) return 0.0;
    double e = env(x);
    if (!std::isfinite(e)) {
      std::ostringstream os;
      os << "coefficient vanishes at interior point x = " << x;
      throw std::domain_error(os.str());
    }
    return d * e;
  }, support_breaks(t));
}

SteinContext target_ctx(const ComparisonProblem& p) {
  return p.method == Method::KernelDiff ? SteinContext::kernel(p.target, p.ell) : SteinContext::one(p.target, p.ell);
}

Coefficient approx_coef(const ComparisonProblem& p) {
  return p.method == Method::KernelDiff ? Coefficient::kernel(p.approx, p.ell) : Coefficient::one(p.approx, p.ell);
}

// the κ of the printed corollaries: boundary term, plus (μ_∞ - μ_n) E_n g for the kernel method
KappaTerms kappa_of(const ComparisonProblem& p, const SteinContext& ctx, const Coefficient& c2,
                    const TestFunction& h) {
  KappaTerms k;
  k.kind = kappa_kind_for(p);
  auto parts = identity_parts(p, p.ell, c2, ctx, h, false);
  k.value = parts.boundary;
  k.limit_diagnostics = std::move(parts.traces);
  if (p.method == Method::KernelDiff) {
    double dm = p.target.mean() - p.approx.mean();
    if (dm != 0.0) {
      SteinSolution sol(ctx, h);
      k.value += dm * En(p.approx, [&](double x) { return p.target.in_support(x) ? sol.g(x) : 0.0; },
                         support_breaks(p.target, &h));
    }
  }
  return k;
}

std::vector<double> z_grid(const Distribution& t, int n) {
  std::vector<double> z;
  if (t.is_lattice()) {
    auto [k0, k1] = t.index_range();
    for (long k = k0; k <= k1; ++k) z.push_back(t.point(k));
    return z;
  }
  for (int i = 0; i < n; ++i) z.push_back(t.quantile(1e-6 + (1 - 2e-6) * i / (n - 1)));
  return z;
}

// sup_z |κ(z)| for half-lines on continuous pairs. The endpoint parts factor:
// near an endpoint shared with S_∞, P(x∧z)P̄(x∨z) = P(z)P̄(x) (upper) or P(x)P̄(z) (lower).
KappaTerms kolmogorov_kappa_sup(const ComparisonProblem& p, const SteinContext& ctx, int nz, par::Exec exec) {
  const auto& n = p.approx;
  const auto& t = p.target;
  bool kernel = p.method == Method::KernelDiff;
  auto log_r = [&](double x) {
    double v = n.log_density(x) - t.log_density(x);
    if (kernel) v += std::log(n.stein_kernel(0, x)) - std::log(t.stein_kernel(0, x));
    return v;
  };
  double a = common_lo(p), b = common_hi(p);
  bool fa = a == t.lo(), fb = b == t.hi();
  auto up = endpoint_limit(p, true, [&](double x) { return std::pair{log_r(x) + (fb ? t.log_sf(x) : 0.0), 1.0}; });
  auto lo = endpoint_limit(p, false, [&](double x) { return std::pair{log_r(x) + (fa ? t.log_cdf(x) : 0.0), 1.0}; });
  double Wb = up.value, Wa = lo.value;
  auto edge = [&](double e, double z) { return t.cdf(std::min(e, z)) * t.sf(std::max(e, z)); };
  auto boundary = [&](double z) {
    double u = fb ? t.cdf(z) * Wb : Wb * edge(b, z);
    double l = fa ? t.sf(z) * Wa : Wa * edge(a, z);
    return u - l;
  };
  double dm = kernel ? t.mean() - n.mean() : 0.0;
  auto mean_term = [&](double z) {
    if (dm == 0.0) return 0.0;
    SteinSolution sol(ctx, TestFunction::half_line(z));
    return dm * En(n, [&](double x) { return t.in_support(x) ? sol.g(x) : 0.0; }, {z, t.lo(), t.hi()});
  };
  auto kappa = [&](double z) { return std::fabs(boundary(z) + mean_term(z)); };
  KappaTerms k;
  k.kind = kernel ? KappaKind::KappaId : KappaKind::Kappa1Star;
  k.limit_diagnostics = {up, lo};
  if (dm == 0.0 && Wa == 0.0 && Wb == 0.0) return k;
  auto zs = z_grid(t, nz);
  auto vs = par::map(zs, kappa, exec);
  auto am = par::argmax(zs, vs);
  double best = std::max(0.0, am.value);
  std::size_t arg = am.index;
  if (dm != 0.0 && zs.size() > 2) {
    double za = zs[arg == 0 ? 0 : arg - 1], zb = zs[std::min(arg + 1, zs.size() - 1)];
    best = std::max(best, quad::golden_max(kappa, za, zb, 1e-10).second);
  }
  // z → ±∞ limits of the factored part
  if (dm == 0.0) best = std::max({best, fb ? std::fabs(Wb) : 0.0, fa ? std::fabs(Wa) : 0.0});
  k.value = best;
  return k;
}

KappaTerms lattice_kappa_sup(const ComparisonProblem& p, const SteinContext& ctx, const Coefficient& c2,
                             par::Exec exec) {
  KappaTerms best;
  best.kind = kappa_kind_for(p);
  auto zs = z_grid(p.target, 0);
  auto vs = par::map(zs, [&](double z) { return std::fabs(kappa_of(p, ctx, c2, TestFunction::half_line(z)).value); },
                     exec);
  best.value = std::max(0.0, par::argmax(zs, vs).value);
  return best;
}

}  // namespace

// ------------------------------------------------------------------ naming

std::string to_string(Metric m) {
  switch (m) {
    case Metric::Kolmogorov: return "kolmogorov";
    case Metric::TV: return "tv";
    case Metric::Wasserstein: return "wasserstein";
  }
  return "?";
}

std::string to_string(Method m) {
  switch (m) {
    case Method::ScoreDiff: return "score";
    case Method::KernelDiff: return "kernel";
    case Method::CrossMeasure: return "cross";
  }
  return "?";
}

Metric parse_metric(std::string_view s) {
  auto v = lower(s);
  if (v == "kol" || v == "kolmogorov") return Metric::Kolmogorov;
  if (v == "tv") return Metric::TV;
  if (v == "wass" || v == "wasserstein") return Metric::Wasserstein;
  throw std::invalid_argument("unknown metric '" + std::string(s) + "'");
}

Method parse_method(std::string_view s) {
  auto v = lower(s);
  if (v == "score") return Method::ScoreDiff;
  if (v == "kernel") return Method::KernelDiff;
  if (v == "cross") return Method::CrossMeasure;
  throw std::invalid_argument("unknown method '" + std::string(s) + "'");
}

std::string to_string(KappaKind k) {
  switch (k) {
    case KappaKind::Kappa1Star: return "kappa1_star";
    case KappaKind::Kappa1StarPm: return "kappa1_star_pm";
    case KappaKind::KappaId: return "kappa_Id";
    case KappaKind::KappaIdPm: return "kappa_Id_pm";
    case KappaKind::KappaNEll: return "kappa_n_ell";
  }
  return "?";
}

KappaKind parse_kappa_kind(std::string_view s) {
  for (auto k : {KappaKind::Kappa1Star, KappaKind::Kappa1StarPm, KappaKind::KappaId, KappaKind::KappaIdPm,
                 KappaKind::KappaNEll})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown kappa kind '" + std::string(s) + "'");
}

ComparisonProblem ComparisonProblem::reversed() const {
  ComparisonProblem r = *this;
  std::swap(r.approx, r.target);
  return r;
}

std::string ComparisonProblem::direction() const { return approx.name() + " -> " + target.name(); }

ComparisonProblem make_problem(const Distribution& approx, const Distribution& target, Metric metric,
                               Method method, std::optional<int> ell) {
  ComparisonProblem p{approx, target, metric, method, 0};
  if (method == Method::CrossMeasure) {
    p.ell = ell.value_or(approx.is_lattice() ? 1 : 0);
    return p;
  }
  if (!same_measure(approx, target))
    throw std::invalid_argument("score/kernel comparison needs both laws on the same dominating measure");
  if (approx.is_lattice()) {
    p.ell = ell.value_or(1);
    if (p.ell != 1 && p.ell != -1) throw std::invalid_argument("lattice pairs take ell = +1 or -1");
  } else {
    if (ell && *ell != 0) throw std::invalid_argument("continuous pairs take ell = 0");
    p.ell = 0;
  }
  if (metric == Metric::Wasserstein && approx.is_lattice())
    throw std::invalid_argument("Wasserstein bounds are implemented for continuous pairs");
  return p;
}

double BoundReport::detail(std::string_view key) const {
  for (const auto& [k, v] : details)
    if (k == key) return v;
  return kNaN;
}

// --------------------------------------------------------------- coefficient

Coefficient Coefficient::one(const Distribution& d, int ell) {
  return {[](double) { return 1.0; }, [d, ell](double x) { return d.score(ell, x); }, "one"};
}

Coefficient Coefficient::kernel(const Distribution& d, int ell) {
  double mu = d.mean();
  return {[d, ell](double x) { return d.in_support(x) ? d.stein_kernel(ell, x) : 0.0; },
          [d, mu](double x) { return d.in_support(x) ? mu - x : 0.0; }, "kernel"};
}

Coefficient Coefficient::from_eta(const Distribution& d, int ell, Fn eta) {
  auto h = TestFunction::generic(eta);
  double m = h.mean(d);
  double sa = a_ell(ell) * d.step();
  return {[d, h, m, sa](double x) { return d.in_support(x) ? -h.partial_ratio(d, x - sa, x, m) : 0.0; },
          [d, eta, m](double x) { return d.in_support(x) ? m - eta(x) : 0.0; }, "eta"};
}

Coefficient Coefficient::custom(const Distribution& d, int ell, Fn c, std::string label) {
  Fn Tc = [d, ell, c](double x) { return canonical_apply(d, ell, c, x); };
  return {std::move(c), std::move(Tc), std::move(label)};
}

// ---------------------------------------------------------------- identities

Difference generic_comparison(const ComparisonProblem& prob, const SteinContext& target_ctx_,
                              const Coefficient& approx_coef_, const TestFunction& h) {
  auto parts = identity_parts(prob, prob.ell, approx_coef_, target_ctx_, h, true);
  Difference d;
  d.main = parts.drift + parts.coef;
  d.outside = parts.outside;
  d.kappa.kind = KappaKind::KappaNEll;
  d.kappa.value = parts.boundary;
  d.kappa.limit_diagnostics = std::move(parts.traces);
  d.value = d.main + d.kappa.value + d.outside;
  return d;
}

Difference generic_comparison_eta(const ComparisonProblem& prob, Fn eta1, Fn deta1, Fn eta2,
                                  const TestFunction& h) {
  auto ctx = SteinContext::from_eta(prob.target, prob.ell, std::move(eta1), std::move(deta1));
  return generic_comparison(prob, ctx, Coefficient::from_eta(prob.approx, prob.ell, std::move(eta2)), h);
}

Difference diff_expectation_score(const ComparisonProblem& prob, const TestFunction& h) {
  require_same_measure(prob);
  auto p = prob;
  p.method = Method::ScoreDiff;
  auto ctx = SteinContext::one(p.target, p.ell);
  auto parts = identity_parts(p, p.ell, Coefficient::one(p.approx, p.ell), ctx, h, true);
  Difference d;
  d.main = parts.drift + parts.coef;
  d.outside = parts.outside;
  d.kappa.kind = kappa_kind_for(p);
  d.kappa.value = parts.boundary;
  d.kappa.limit_diagnostics = std::move(parts.traces);
  d.value = d.main + d.kappa.value + d.outside;
  return d;
}

Difference diff_expectation_kernel(const ComparisonProblem& prob, const TestFunction& h) {
  require_same_measure(prob);
  auto p = prob;
  p.method = Method::KernelDiff;
  auto ctx = SteinContext::kernel(p.target, p.ell);
  auto parts = identity_parts(p, p.ell, Coefficient::kernel(p.approx, p.ell), ctx, h, true);
  Difference d;
  // the mean shift (T_∞τ_∞ - T_nτ_n = μ_∞ - μ_n) sits in κ_Id
  d.main = parts.coef;
  d.outside = parts.outside;
  d.kappa.kind = kappa_kind_for(p);
  d.kappa.value = parts.boundary + parts.drift;
  d.kappa.limit_diagnostics = std::move(parts.traces);
  d.value = d.main + d.kappa.value + d.outside;
  return d;
}

// ---------------------------------------------------------------------- A set

TestFunction ASet::indicator() const {
  return lattice ? TestFunction::indicator(points) : TestFunction::indicator(intervals);
}

ASet locate_A_set(const ComparisonProblem& prob) {
  require_same_measure(prob);
  const auto& n = prob.approx;
  const auto& t = prob.target;
  ASet a;
  a.lattice = n.is_lattice();
  if (a.lattice) {
    double s = n.step(), o = n.origin();
    auto [a0, a1] = n.index_range();
    auto [b0, b1] = t.index_range();
    double lo = std::min(n.point(a0), t.point(b0)), hi = std::max(n.point(a1), t.point(b1));
    for (long k = std::lround((lo - o) / s); k <= std::lround((hi - o) / s); ++k) {
      double x = o + s * static_cast<double>(k);
      double u = n.pdf(x), v = t.pdf(x);
      if ((u > 0 || v > 0) && u >= v) a.points.push_back(x);
    }
    return a;
  }
  double lo = std::min(n.lo(), t.lo()), hi = std::max(n.hi(), t.hi());
  std::vector<double> z;
  for (const auto* d : {&n, &t}) {
    for (int i = 0; i <= 512; ++i) {
      double u = i == 0 ? 1e-12 : i == 512 ? 1 - 1e-12 : i / 512.0;
      z.push_back(d->quantile(u));
    }
    for (double c : {d->lo(), d->hi()})
      if (std::isfinite(c)) z.push_back(c);
  }
  std::sort(z.begin(), z.end());
  z.erase(std::unique(z.begin(), z.end()), z.end());
  auto diff = [&](double x) { return std::max(n.log_density(x), -745.0) - std::max(t.log_density(x), -745.0); };
  // ties go to A; off both supports counts as a tie
  auto in_a = [&](double x) { return diff(x) >= 0; };
  std::vector<bool> side;
  for (double x : z) side.push_back(in_a(x));
  std::vector<double> cuts;
  for (std::size_t i = 0; i + 1 < z.size(); ++i) {
    if (side[i] == side[i + 1]) continue;
    cuts.push_back(quad::bisect(diff, z[i], z[i + 1], 1e-12));
    if (cuts.size() > 64) throw std::runtime_error("locate_A_set: more than 64 sign changes of p_n - p_inf");
  }
  a.crossings = cuts;
  double start = lo;
  bool inside = side.front();
  for (std::size_t i = 0, j = 0; i + 1 < z.size(); ++i) {
    if (side[i] == side[i + 1]) continue;
    double c = cuts[j++];
    if (inside) a.intervals.push_back({start, c});
    start = c;
    inside = side[i + 1];
  }
  if (inside) a.intervals.push_back({start, hi});
  return a;
}

// ----------------------------------------------------------------------- κ

KappaTerms kappa_terms(const ComparisonProblem& prob, KappaKind kind, const TestFunction& h) {
  auto p = prob;
  switch (kind) {
    case KappaKind::Kappa1Star:
    case KappaKind::Kappa1StarPm: p.method = Method::ScoreDiff; break;
    case KappaKind::KappaId:
    case KappaKind::KappaIdPm: p.method = Method::KernelDiff; break;
    case KappaKind::KappaNEll: {
      // cross-measure: c = x^{α+1} for Fréchet targets, c = 1 otherwise
      SteinContext ctx = SteinContext::one(p.target, 0);
      Coefficient c2 = Coefficient::one(p.approx, p.ell);
      if (p.target.family() == Family::Frechet) {
        double al = p.target.params()[0];
        ctx = SteinContext::custom(p.target, 0, [al](double x) { return x > 0 ? std::pow(x, al + 1) : 0.0; },
                                   [al](double) { return al; }, "x^(a+1)");
        c2 = Coefficient::custom(p.approx, p.ell, [al](double x) { return x > 0 ? std::pow(x, al + 1) : 0.0; });
      }
      auto parts = identity_parts(p, p.ell, c2, ctx, h, false);
      return {kind, parts.boundary, std::move(parts.traces)};
    }
  }
  require_same_measure(p);
  auto k = kappa_of(p, target_ctx(p), approx_coef(p), h);
  k.kind = kind;
  return k;
}

KappaTerms kappa_terms(const ComparisonProblem& prob, KappaKind kind, double z) {
  return kappa_terms(prob, kind, TestFunction::half_line(z));
}

// -------------------------------------------------------------------- bounds

namespace {

// first term of the Kolmogorov/TV bounds: E_n[|Δρ| G_K1] or E_n[|τ_n - τ_∞| DG_K1]
double indicator_main(const ComparisonProblem& p, const SteinContext& ctx) {
  auto h = TestFunction::generic([](double) { return 0.0; }, 1.0, std::nullopt, "indicator-class");
  const auto& n = p.approx;
  const auto& t = p.target;
  if (p.method == Method::KernelDiff) {
    auto env = envelope(ctx, h, BoundKind::DG_K1);
    return weighted_mean(n, t, [&](double x) { return n.stein_kernel(p.ell, x) - t.stein_kernel(p.ell, x); }, env);
  }
  auto env = envelope(ctx, h, BoundKind::G_K1);
  return weighted_mean(n, t, [&](double x) { return t.score(p.ell, x) - n.score(p.ell, x); }, env);
}

void finish(BoundReport& r, double main, const KappaTerms& k, double outside) {
  r.kappa = k;
  r.details.emplace_back("main", main);
  r.details.emplace_back("kappa", k.value);
  r.details.emplace_back("outside_support", outside);
  r.bound = main + std::fabs(k.value) + outside;
}

void add_kernel_details(BoundReport& r, const ComparisonProblem& p) {
  if (p.method != Method::KernelDiff) return;
  const auto& n = p.approx;
  const auto& t = p.target;
  r.details.emplace_back("mean_abs_tau_ratio_dev", En(n, [&](double x) {
    if (!t.in_support(x)) return 0.0;
    double a = n.stein_kernel(p.ell, x), b = t.stein_kernel(p.ell, x);
    return a == b ? 0.0 : std::fabs(a / b - 1);
  }, support_breaks(t)));
}

}  // namespace

BoundReport kolmogorov_bound(const ComparisonProblem& prob, const BoundOptions& opt) {
  if (prob.method == Method::CrossMeasure) return cross_measure_bound(prob, opt);
  require_same_measure(prob);
  auto p = prob;
  p.metric = Metric::Kolmogorov;
  auto r = start_report(p);
  auto ctx = target_ctx(p);
  double main = indicator_main(p, ctx);
  KappaTerms k = p.target.is_lattice() ? lattice_kappa_sup(p, ctx, approx_coef(p), opt.exec)
                                       : kolmogorov_kappa_sup(p, ctx, opt.z_grid, opt.exec);
  finish(r, main, k, mass_outside(p.approx, p.target));
  add_kernel_details(r, p);
  attach_oracle(r, p, opt);
  return r;
}

BoundReport tv_bound(const ComparisonProblem& prob, const BoundOptions& opt) {
  if (prob.method == Method::CrossMeasure) return cross_measure_bound(prob, opt);
  require_same_measure(prob);
  auto p = prob;
  p.metric = Metric::TV;
  auto r = start_report(p);
  auto ctx = target_ctx(p);
  double main = indicator_main(p, ctx);
  auto A = locate_A_set(p);
  auto k = kappa_of(p, ctx, approx_coef(p), A.indicator());
  finish(r, main, k, mass_outside(p.approx, p.target));
  r.details.emplace_back("a_set_pieces", A.lattice ? A.points.size() : A.intervals.size());
  add_kernel_details(r, p);
  attach_oracle(r, p, opt);
  return r;
}

BoundReport wasserstein_bound(const ComparisonProblem& prob, const BoundOptions& opt) {
  if (prob.method == Method::CrossMeasure) return cross_measure_bound(prob, opt);
  require_same_measure(prob);
  if (prob.approx.is_lattice()) throw std::invalid_argument("Wasserstein bounds are implemented for continuous pairs");
  auto p = prob;
  p.metric = Metric::Wasserstein;
  const auto& n = p.approx;
  const auto& t = p.target;
  if (!std::isfinite(t.mean())) throw std::invalid_argument("Wasserstein bound needs a finite target mean");
  double out = mass_outside(n, t);
  if (out > 0) throw std::invalid_argument("Wasserstein bound needs supp(X_n) inside supp(X_inf)");
  auto r = start_report(p);
  auto ctx = target_ctx(p);
  auto lip = TestFunction::lipschitz([](double x) { return x; }, [](double) { return 1.0; }, 1.0);
  bool kernel = p.method == Method::KernelDiff;
  double main;
  if (kernel) {
    auto env = envelope(ctx, lip, BoundKind::DG_ETA_K2);
    main = weighted_mean(n, t, [&](double x) { return n.stein_kernel(0, x) - t.stein_kernel(0, x); }, env);
  } else {
    auto env = envelope(ctx, lip, BoundKind::G_K2);
    main = weighted_mean(n, t, [&](double x) { return t.score(0, x) - n.score(0, x); }, env);
  }
  // |L_∞h| <= τ_∞ for |h'| <= 1, so the endpoint terms are at most lim p_n τ_∞ (score) or lim p_n τ_n (kernel)
  auto F = [&](double x) {
    double tau = kernel ? n.stein_kernel(0, x) : t.stein_kernel(0, x);
    return std::pair{n.log_density(x) + std::log(std::fabs(tau)), 1.0};
  };
  KappaTerms k;
  k.kind = kernel ? KappaKind::KappaId : KappaKind::Kappa1Star;
  auto up = endpoint_limit(p, true, F);
  auto lo = endpoint_limit(p, false, F);
  k.value = std::fabs(up.value) + std::fabs(lo.value);
  // |g| <= 1 under c = τ_∞
  if (kernel) k.value += std::fabs(t.mean() - n.mean());
  k.limit_diagnostics = {up, lo};
  finish(r, main, k, 0.0);
  add_kernel_details(r, p);
  attach_oracle(r, p, opt);
  return r;
}

BoundReport cross_measure_bound(const ComparisonProblem& prob, const BoundOptions& opt) {
  auto p = prob;
  p.method = Method::CrossMeasure;
  const auto& n = p.approx;
  const auto& t = p.target;
  auto r = start_report(p);
  if (n.family() == Family::ScaledParetoMax && t.family() == Family::Frechet) {
    if (p.metric == Metric::Wasserstein) throw std::invalid_argument("Pareto/Frechet comparison covers Kolmogorov and TV");
    double al = t.params()[0];
    if (std::fabs(n.params()[1] - al) > 1e-12) throw std::invalid_argument("Pareto/Frechet comparison needs equal alpha");
    p.ell = 0;
    r.ell = 0;
    double nn = n.params()[0];
    // c = x^{α+1}: T_∞c = α, T_n c = c' + c ρ_n
    auto Tn = [&](double x) { return (al + 1) * std::pow(x, al) + std::pow(x, al + 1) * n.score(0, x); };
    double dev = En(n, [&](double x) { return std::fabs(1 - Tn(x) / al); });
    // M_∞/c = (1 - e^{-x^{-α}})/α
    double nonuniform = En(n, [&](double x) { return std::fabs(al - Tn(x)) * (-std::expm1(-std::pow(x, -al))) / al; });
    // endpoint part: c g p_n = p_n L_∞h, |L_∞h| <= M_∞
    auto F = [&](double x) {
      return std::pair{n.log_density(x) + t.log_cdf(x) + t.log_sf(x) - t.log_density(x), 1.0};
    };
    KappaTerms k;
    k.kind = KappaKind::KappaNEll;
    auto up = endpoint_limit(p, true, F);
    auto lo = endpoint_limit(p, false, F);
    k.value = std::fabs(up.value) + std::fabs(lo.value);
    k.limit_diagnostics = {up, lo};
    r.kappa = k;
    r.bound = dev + k.value;
    r.details = {{"mean_abs_dev", dev},
                 {"closed_form", 2 / (nn - 1) * std::pow(1 - 1 / nn, nn)},
                 {"closed_form_bound", 2 / std::numbers::e / (nn - 1)},
                 {"nonuniform", nonuniform + k.value},
                 {"kappa", k.value}};
    attach_oracle(r, p, opt);
    return r;
  }
  if (n.family() == Family::StdBinomial && t.family() == Family::Normal) {
    if (p.metric != Metric::Wasserstein) throw std::invalid_argument("binomial/normal comparison covers Wasserstein");
    if (t.params()[0] != 0.0 || t.params()[1] != 1.0) throw std::invalid_argument("binomial/normal needs N(0,1)");
    p.ell = 1;
    r.ell = 1;
    double nn = n.params()[0], th = n.params()[1];
    double rn = std::sqrt(nn * th * (1 - th));
    // c = 1, ℓ = +1: |g| <= 1, |g''| <= 2 for |h'| <= 1
    double drift = En(n, [&](double x) { return std::fabs(-x - n.score(1, x)); });
    double drift_printed = 2 * std::sqrt(1 / th - 1) / std::sqrt(nn);
    double taylor = 2 / rn;
    double edge = std::pow(1 - th, nn);
    KappaTerms k;
    k.kind = KappaKind::KappaNEll;
    k.value = edge;
    r.kappa = k;
    r.bound = drift_printed + taylor + edge;
    r.details = {{"drift", drift}, {"drift_printed", drift_printed}, {"taylor", taylor}, {"kappa", edge},
                 {"computed", drift + taylor + edge}};
    attach_oracle(r, p, opt);
    return r;
  }
  throw std::invalid_argument("cross-measure bounds cover paretomax->frechet and stdbinomial->normal(0,1)");
}

BoundReport bound(const ComparisonProblem& prob, const BoundOptions& opt) {
  if (prob.method == Method::CrossMeasure) return cross_measure_bound(prob, opt);
  switch (prob.metric) {
    case Metric::Kolmogorov: return kolmogorov_bound(prob, opt);
    case Metric::TV: return tv_bound(prob, opt);
    case Metric::Wasserstein: return wasserstein_bound(prob, opt);
  }
  throw std::logic_error("unreachable");
}

}  // namespace stein
