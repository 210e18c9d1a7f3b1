#include "stein/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace stein {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_atom(const Distribution& d, double z) {
  if (!d.is_lattice()) return false;
  double k = (z - d.origin()) / d.step();
  return std::fabs(k - std::round(k)) < 1e-9 * (1.0 + std::fabs(k));
}

// P(X < z)
double left_cdf(const Distribution& d, double z) {
  if (!is_atom(d, z)) return d.cdf(z);
  return d.cdf(z - 0.5 * d.step());
}

std::vector<double> atoms(const Distribution& d) {
  auto [k0, k1] = d.index_range();
  if (k1 - k0 > 2'000'000) throw std::invalid_argument("oracle: lattice range too large");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(k1 - k0 + 1));
  for (long k = k0; k <= k1; ++k) out.push_back(d.point(k));
  return out;
}

std::vector<double> quantile_grid(const Distribution& d, int n) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n) + 2);
  for (double u : {1e-12, 1e-9, 1e-6}) out.push_back(d.quantile(u));
  for (int i = 1; i < n - 1; ++i) out.push_back(d.quantile(static_cast<double>(i) / (n - 1)));
  for (double u : {1 - 1e-6, 1 - 1e-9, 1 - 1e-12}) out.push_back(d.quantile(u));
  return out;
}

std::vector<double> merged_points(const Distribution& p, const Distribution& q, int n) {
  std::vector<double> z;
  for (const auto* d : {&p, &q}) {
    auto v = d->is_lattice() ? atoms(*d) : quantile_grid(*d, n);
    z.insert(z.end(), v.begin(), v.end());
  }
  z.erase(std::remove_if(z.begin(), z.end(), [](double v) { return !std::isfinite(v); }), z.end());
  std::sort(z.begin(), z.end());
  z.erase(std::unique(z.begin(), z.end()), z.end());
  return z;
}

}  // namespace

std::string to_string(OracleScheme s) {
  switch (s) {
    case OracleScheme::Quadrature: return "quadrature";
    case OracleScheme::Summation: return "summation";
    case OracleScheme::GridSup: return "grid-sup";
  }
  return "?";
}

bool same_measure(const Distribution& p, const Distribution& q) {
  if (p.is_lattice() != q.is_lattice()) return false;
  if (!p.is_lattice()) return true;
  if (std::fabs(p.step() - q.step()) > 1e-12 * p.step()) return false;
  double k = (q.origin() - p.origin()) / p.step();
  return std::fabs(k - std::round(k)) < 1e-9;
}

OracleResult exact_kolmogorov(const Distribution& p, const Distribution& q) {
  OracleResult r;
  r.scheme = OracleScheme::GridSup;
  auto z = merged_points(p, q, 1025);
  r.lo = z.front();
  r.hi = z.back();
  auto gap = [&](double x) { return std::fabs(p.cdf(x) - q.cdf(x)); };
  double best = 0.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    double v = std::max(gap(z[i]), std::fabs(left_cdf(p, z[i]) - left_cdf(q, z[i])));
    if (v > best) best = v, arg = i;
  }
  // both continuous: the sup sits between grid points, refine around it
  if (!p.is_lattice() && !q.is_lattice() && z.size() > 2) {
    double a = z[arg == 0 ? 0 : arg - 1], b = z[std::min(arg + 1, z.size() - 1)];
    auto [xm, vm] = quad::golden_max(gap, a, b, 1e-13);
    (void)xm;
    // the bracket may straddle two local maxima; golden only ever improves
    r.error_estimate = std::max(0.0, vm - best) + 1e-13 * std::max(p.density(xm), q.density(xm));
    best = std::max(best, vm);
  }
  r.value = best;
  return r;
}

OracleResult exact_tv(const Distribution& p, const Distribution& q) {
  if (!same_measure(p, q)) throw std::invalid_argument("exact_tv: laws need the same dominating measure");
  OracleResult r;
  if (p.is_lattice()) {
    r.scheme = OracleScheme::Summation;
    double s = p.step(), o = p.origin();
    auto [a0, a1] = p.index_range();
    auto [b0, b1] = q.index_range();
    double lo = std::min(p.point(a0), q.point(b0)), hi = std::max(p.point(a1), q.point(b1));
    long k0 = std::lround((lo - o) / s), k1 = std::lround((hi - o) / s);
    double sum = 0.0, mp = 0.0, mq = 0.0;
    for (long k = k0; k <= k1; ++k) {
      double x = o + s * static_cast<double>(k);
      double u = p.pdf(x), v = q.pdf(x);
      sum += std::fabs(u - v);
      mp += u;
      mq += v;
    }
    r.value = 0.5 * sum;
    r.lo = lo;
    r.hi = hi;
    r.error_estimate = 0.5 * (std::fabs(1 - mp) + std::fabs(1 - mq)) + 1e-15 * static_cast<double>(k1 - k0 + 1);
    return r;
  }
  r.scheme = OracleScheme::Quadrature;
  double lo = std::min(p.lo(), q.lo()), hi = std::max(p.hi(), q.hi());
  r.lo = lo;
  r.hi = hi;
  // sign changes of log p - log q on the merged quantile grid
  auto z = merged_points(p, q, 513);
  auto side = [&](double x) {
    double a = p.log_density(x), b = q.log_density(x);
    if (a == -kInf && b == -kInf) return 1.0;
    return a - b >= 0 ? 1.0 : -1.0;
  };
  std::vector<double> pts{lo, hi};
  for (double c : {p.lo(), p.hi(), q.lo(), q.hi()})
    if (std::isfinite(c)) pts.push_back(c);
  for (std::size_t i = 0; i + 1 < z.size(); ++i) {
    if (side(z[i]) == side(z[i + 1])) continue;
    auto f = [&](double x) { return std::max(p.log_density(x), -700.0) - std::max(q.log_density(x), -700.0); };
    pts.push_back(quad::bisect(f, z[i], z[i + 1], 1e-13));
  }
  for (double c : z) pts.push_back(c);  // denser pieces help near support edges
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  pts.erase(std::remove_if(pts.begin(), pts.end(), [&](double v) { return v < lo || v > hi; }), pts.end());
  quad::Options opt;
  opt.abs_tol = 1e-14;
  opt.rel_tol = 1e-11;
  auto res = quad::integrate_pieces([&](double x) { return 0.5 * std::fabs(p.density(x) - q.density(x)); }, pts, opt);
  r.value = res.value;
  r.error_estimate = res.error;
  r.flagged = !res.converged;
  return r;
}

OracleResult exact_wasserstein(const Distribution& p, const Distribution& q, double tol) {
  OracleResult r;
  double lo = std::min(p.quantile(1e-12), q.quantile(1e-12));
  double hi = std::max(p.quantile(1 - 1e-12), q.quantile(1 - 1e-12));
  r.lo = lo;
  r.hi = hi;
  if (p.is_lattice() && q.is_lattice()) {
    // both cdfs are step functions: exact sum over the merged atoms
    r.scheme = OracleScheme::Summation;
    auto z = merged_points(p, q, 0);
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < z.size(); ++i) sum += (z[i + 1] - z[i]) * std::fabs(p.cdf(z[i]) - q.cdf(z[i]));
    r.value = sum;
    r.error_estimate = 1e-12 * (hi - lo);
    return r;
  }
  r.scheme = OracleScheme::Quadrature;
  std::vector<double> pts{lo, hi};
  for (const auto* d : {&p, &q}) {
    if (d->is_lattice()) {
      auto a = atoms(*d);
      pts.insert(pts.end(), a.begin(), a.end());
    } else {
      for (double u : {1e-9, 1e-6, 1e-3, 0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99, 1 - 1e-3,
                       1 - 1e-6, 1 - 1e-9})
        pts.push_back(d->quantile(u));
    }
    for (double c : {d->lo(), d->hi()})
      if (std::isfinite(c)) pts.push_back(c);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  pts.erase(std::remove_if(pts.begin(), pts.end(), [&](double v) { return v < lo || v > hi; }), pts.end());
  quad::Options opt;
  opt.abs_tol = 0.1 * tol;
  opt.rel_tol = 1e-11;
  auto res = quad::integrate_pieces([&](double x) { return std::fabs(p.cdf(x) - q.cdf(x)); }, pts, opt);
  // truncated tails: ∫ P + ∫ Q below lo, ∫ P̄ + Q̄ above hi
  double tails = 0.0;
  for (const auto* d : {&p, &q}) {
    if (d->lo() < lo) tails += quad::integrate([&](double x) { return d->cdf(x); }, -kInf, lo, opt).value;
    if (d->hi() > hi) tails += quad::integrate([&](double x) { return d->sf(x); }, hi, kInf, opt).value;
  }
  r.value = res.value;
  r.error_estimate = res.error + tails;
  r.flagged = !res.converged || r.error_estimate > tol;
  return r;
}

McEstimate mc_expectation(const Distribution& d, const quad::Fn& f, std::uint64_t seed, std::size_t n) {
  McEstimate e;
  e.n = n;
  if (n == 0) return e;
  auto xs = d.sample(n, seed);
  // Welford
  double mean = 0.0, m2 = 0.0;
  std::size_t k = 0;
  for (double x : xs) {
    double v = f(x);
    ++k;
    double dlt = v - mean;
    mean += dlt / static_cast<double>(k);
    m2 += dlt * (v - mean);
  }
  e.mean = mean;
  e.stderr_ = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  return e;
}

}  // namespace stein
