#include "stein/distribution.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "stein/special.hpp"

namespace stein {

namespace sp = special;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kBodyTail = 1e-13;
constexpr double kLatticeTail = 1e-17;

double log_choose(double n, double k) { return sp::log_gamma(n + 1) - sp::log_gamma(k + 1) - sp::log_gamma(n - k + 1); }

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}
}  // namespace

namespace detail {

class Model {
 public:
  Family family{};
  std::vector<double> params;
  std::string label;

  // filled once by the factory before the model is shared
  double mean_ = kNaN;
  double body_lo = -kInf, body_hi = kInf;
  std::vector<double> body_breaks;  // interior quantiles, so no piece is all tail
  long k_first = 0, k_last = 0;

  virtual ~Model() = default;
  virtual bool lattice() const { return false; }

  // continuous interface
  virtual double lo() const { return -kInf; }
  virtual double hi() const { return kInf; }
  virtual double log_pdf(double) const { return kNaN; }
  virtual double cdf(double x) const { return std::exp(log_cdf(x)); }
  virtual double sf(double x) const { return std::exp(log_sf(x)); }
  virtual double log_cdf(double x) const { return std::log(cdf(x)); }
  virtual double log_sf(double x) const { return std::log(sf(x)); }

  // lattice interface, indices k with point origin + step * k
  virtual double origin() const { return 0.0; }
  virtual double step() const { return 1.0; }
  virtual double k_lo() const { return 0.0; }
  virtual double k_hi() const { return kInf; }
  virtual double log_pmf(long) const { return kNaN; }
  virtual double log_cdf_k(long k) const { return std::log(cdf_k(k)); }
  virtual double log_sf_k(long k) const { return std::log(sf_k(k)); }
  virtual double cdf_k(long k) const { return std::exp(log_cdf_k(k)); }
  virtual double sf_k(long k) const { return std::exp(log_sf_k(k)); }

  virtual double closed_mean() const { return kNaN; }
  virtual double quantile(double) const { return kNaN; }
  virtual double score(int, double) const { return kNaN; }
  virtual double kernel(int, double) const { return kNaN; }
  virtual double draw(std::mt19937_64& rng) const = 0;
};

namespace {

double uniform01(std::mt19937_64& rng) {
  // open interval (0,1)
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// ---------------------------------------------------------------- continuous

class Normal final : public Model {
 public:
  double mu, sigma;
  Normal(double m, double s) : mu(m), sigma(s) {}
  double z(double x) const { return (x - mu) / sigma; }
  double log_pdf(double x) const override {
    double t = z(x);
    return -0.5 * t * t - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  double cdf(double x) const override { return sp::ndtr(z(x)); }
  double sf(double x) const override { return sp::ndtr_c(z(x)); }
  double log_cdf(double x) const override { return sp::log_ndtr(z(x)); }
  double log_sf(double x) const override { return sp::log_ndtr_c(z(x)); }
  double closed_mean() const override { return mu; }
  double quantile(double u) const override { return mu + sigma * sp::ndtri(u); }
  double score(int, double x) const override { return -(x - mu) / (sigma * sigma); }
  double kernel(int, double) const override { return sigma * sigma; }
  double draw(std::mt19937_64& rng) const override { return std::normal_distribution<double>(mu, sigma)(rng); }
};

class Exponential final : public Model {
 public:
  double lam;
  explicit Exponential(double l) : lam(l) {}
  double lo() const override { return 0.0; }
  double log_pdf(double x) const override { return x < 0 ? -kInf : std::log(lam) - lam * x; }
  double cdf(double x) const override { return x <= 0 ? 0.0 : -std::expm1(-lam * x); }
  double sf(double x) const override { return x <= 0 ? 1.0 : std::exp(-lam * x); }
  double log_cdf(double x) const override { return x <= 0 ? -kInf : sp::log1mexp(-lam * x); }
  double log_sf(double x) const override { return x <= 0 ? 0.0 : -lam * x; }
  double closed_mean() const override { return 1.0 / lam; }
  double quantile(double u) const override { return -std::log1p(-u) / lam; }
  double score(int, double) const override { return -lam; }
  double kernel(int, double x) const override { return x / lam; }
  double draw(std::mt19937_64& rng) const override { return std::exponential_distribution<double>(lam)(rng); }
};

class GammaLaw final : public Model {
 public:
  double r, lam;
  GammaLaw(double r_, double l) : r(r_), lam(l) {}
  double lo() const override { return 0.0; }
  double log_pdf(double x) const override {
    if (x < 0) return -kInf;
    if (x == 0) return r == 1 ? std::log(lam) : (r < 1 ? kInf : -kInf);
    return r * std::log(lam) + (r - 1) * std::log(x) - lam * x - sp::log_gamma(r);
  }
  double log_cdf(double x) const override { return x <= 0 ? -kInf : sp::log_gamma_p(r, lam * x); }
  double log_sf(double x) const override { return x <= 0 ? 0.0 : sp::log_gamma_q(r, lam * x); }
  double closed_mean() const override { return r / lam; }
  double score(int, double x) const override { return (r - 1) / x - lam; }
  double kernel(int, double x) const override { return x / lam; }
  double draw(std::mt19937_64& rng) const override { return std::gamma_distribution<double>(r, 1.0 / lam)(rng); }
};

class BetaLaw final : public Model {
 public:
  double a, b, lbeta;
  BetaLaw(double a_, double b_) : a(a_), b(b_), lbeta(sp::log_gamma(a_) + sp::log_gamma(b_) - sp::log_gamma(a_ + b_)) {}
  double lo() const override { return 0.0; }
  double hi() const override { return 1.0; }
  double log_pdf(double x) const override {
    if (x < 0 || x > 1) return -kInf;
    return (a - 1) * std::log(x) + (b - 1) * std::log1p(-x) - lbeta;
  }
  double log_cdf(double x) const override {
    if (x <= 0) return -kInf;
    if (x >= 1) return 0.0;
    return sp::log_ibeta(x, a, b);
  }
  double log_sf(double x) const override {
    if (x <= 0) return 0.0;
    if (x >= 1) return -kInf;
    return sp::log_ibeta(1.0 - x, b, a);
  }
  double closed_mean() const override { return a / (a + b); }
  double score(int, double x) const override { return ((a - 1) - x * (a + b - 2)) / (x * (1 - x)); }
  double kernel(int, double x) const override { return x * (1 - x) / (a + b); }
  double draw(std::mt19937_64& rng) const override {
    double u = std::gamma_distribution<double>(a, 1.0)(rng);
    double v = std::gamma_distribution<double>(b, 1.0)(rng);
    return u / (u + v);
  }
};

class Student final : public Model {
 public:
  double nu, lnorm;
  explicit Student(double n)
      : nu(n), lnorm(sp::log_gamma(0.5 * (n + 1)) - sp::log_gamma(0.5 * n) - 0.5 * std::log(n * std::numbers::pi)) {}
  double log_pdf(double x) const override { return lnorm - 0.5 * (nu + 1) * std::log1p(x * x / nu); }
  // log P(T > t) for t >= 0
  double log_upper(double t) const {
    double x2 = t * t / (nu + t * t);
    if (x2 < 0.5) return std::log(0.5) + sp::log1mexp(sp::log_ibeta(x2, 0.5, 0.5 * nu));
    return std::log(0.5) + sp::log_ibeta(nu / (nu + t * t), 0.5 * nu, 0.5);
  }
  double log_sf(double x) const override { return x >= 0 ? log_upper(x) : sp::log1mexp(log_upper(-x)); }
  double log_cdf(double x) const override { return log_sf(-x); }
  double closed_mean() const override { return nu > 1 ? 0.0 : kNaN; }
  double score(int, double x) const override { return -x * (nu + 1) / (x * x + nu); }
  double kernel(int, double x) const override { return nu > 1 ? (x * x + nu) / (nu - 1) : kNaN; }
  double draw(std::mt19937_64& rng) const override { return std::student_t_distribution<double>(nu)(rng); }
};

class Frechet final : public Model {
 public:
  double alpha;
  explicit Frechet(double a) : alpha(a) {}
  double lo() const override { return 0.0; }
  double log_pdf(double x) const override {
    if (x <= 0) return -kInf;
    return std::log(alpha) - (alpha + 1) * std::log(x) - std::pow(x, -alpha);
  }
  double log_cdf(double x) const override { return x <= 0 ? -kInf : -std::pow(x, -alpha); }
  double log_sf(double x) const override { return x <= 0 ? 0.0 : sp::log1mexp(-std::pow(x, -alpha)); }
  double closed_mean() const override { return alpha > 1 ? std::exp(sp::log_gamma(1 - 1 / alpha)) : kInf; }
  double quantile(double u) const override { return std::pow(-std::log(u), -1.0 / alpha); }
  double score(int, double x) const override { return alpha * std::pow(x, -alpha - 1) - (1 + alpha) / x; }
  double draw(std::mt19937_64& rng) const override { return quantile(uniform01(rng)); }
};

class Rayleigh final : public Model {
 public:
  double lo() const override { return 0.0; }
  double log_pdf(double x) const override { return x < 0 ? -kInf : std::log(2.0 * x) - x * x; }
  double log_cdf(double x) const override { return x <= 0 ? -kInf : sp::log1mexp(-x * x); }
  double log_sf(double x) const override { return x <= 0 ? 0.0 : -x * x; }
  double closed_mean() const override { return 0.5 * std::sqrt(std::numbers::pi); }
  double quantile(double u) const override { return std::sqrt(-std::log1p(-u)); }
  double score(int, double x) const override { return 1 / x - 2 * x; }
  double kernel(int, double x) const override {
    const double sqpi = std::sqrt(std::numbers::pi);
    if (x <= 0) return 0.0;
    if (x < 0.5) {
      // erfcx(x) = sum (-x)^n / Gamma(1 + n/2); the n=0,1 terms cancel
      double s = 0.0, xp = x;
      for (int n = 2; n < 60; ++n) {
        s += ((n % 2) ? -xp : xp) / std::tgamma(1.0 + 0.5 * n);
        xp *= x;
      }
      return 0.25 * sqpi * s;
    }
    return (2 * x + sqpi * sp::erfcx(x) - sqpi) / (4 * x);
  }
  double draw(std::mt19937_64& rng) const override { return quantile(uniform01(rng)); }
};

class ParetoMax final : public Model {
 public:
  int n;
  double alpha;
  ParetoMax(int n_, double a) : n(n_), alpha(a) {}
  double t(double x) const { return std::pow(x, -alpha) / n; }
  double lo() const override { return std::pow(static_cast<double>(n), -1.0 / alpha); }
  double log_pdf(double x) const override {
    if (x < lo()) return -kInf;
    double tt = t(x);
    if (tt >= 1) return n == 1 ? std::log(alpha) - (alpha + 1) * std::log(x) : -kInf;
    return std::log(alpha) - (alpha + 1) * std::log(x) + (n - 1) * std::log1p(-tt);
  }
  double log_cdf(double x) const override {
    if (x <= lo()) return -kInf;
    return n * std::log1p(-t(x));
  }
  double log_sf(double x) const override {
    if (x <= lo()) return 0.0;
    return sp::log1mexp(n * std::log1p(-t(x)));
  }
  double closed_mean() const override {
    if (alpha <= 1) return kInf;
    return std::pow(static_cast<double>(n), 1 - 1 / alpha) *
           std::exp(sp::log_gamma(1 - 1 / alpha) + sp::log_gamma(n) - sp::log_gamma(n + 1 - 1 / alpha));
  }
  double quantile(double u) const override {
    double tt = -std::expm1(std::log(u) / n);
    return std::pow(n * tt, -1.0 / alpha);
  }
  double score(int, double x) const override {
    double tt = t(x);
    return -(alpha + 1) / x + (n - 1) * (alpha * tt / x) / (1 - tt);
  }
  double draw(std::mt19937_64& rng) const override { return quantile(uniform01(rng)); }
};

class RayleighN final : public Model {
 public:
  int n;
  explicit RayleighN(int n_) : n(n_) {}
  double lo() const override { return 0.0; }
  double hi() const override { return std::sqrt(static_cast<double>(n)); }
  double log_pdf(double x) const override {
    if (x < 0 || x > hi()) return -kInf;
    return std::log(2.0 * (n - 1) / n) + std::log(x) + (n - 2) * std::log1p(-x * x / n);
  }
  double log_sf(double x) const override {
    if (x <= 0) return 0.0;
    if (x >= hi()) return -kInf;
    return (n - 1) * std::log1p(-x * x / n);
  }
  double log_cdf(double x) const override {
    if (x <= 0) return -kInf;
    if (x >= hi()) return 0.0;
    return sp::log1mexp(log_sf(x));
  }
  double closed_mean() const override {
    return std::sqrt(static_cast<double>(n)) * 0.5 * std::sqrt(std::numbers::pi) *
           std::exp(sp::log_gamma(n) - sp::log_gamma(n + 0.5));
  }
  double quantile(double u) const override { return std::sqrt(-n * std::expm1(std::log1p(-u) / (n - 1))); }
  double score(int, double x) const override { return 1 / x - 2 * x * (n - 2) / (n - x * x); }
  double draw(std::mt19937_64& rng) const override { return quantile(uniform01(rng)); }
};

// ------------------------------------------------------------------- lattice

class LatticeModel : public Model {
 public:
  bool lattice() const override { return true; }
};

class Poisson final : public LatticeModel {
 public:
  double lam;
  explicit Poisson(double l) : lam(l) {}
  double log_pmf(long k) const override {
    if (k < 0) return -kInf;
    return k * std::log(lam) - lam - sp::log_gamma(k + 1.0);
  }
  double log_cdf_k(long k) const override { return k < 0 ? -kInf : sp::log_gamma_q(k + 1.0, lam); }
  double log_sf_k(long k) const override { return k < 0 ? 0.0 : sp::log_gamma_p(k + 1.0, lam); }
  double closed_mean() const override { return lam; }
  double score(int ell, double x) const override { return ell == 1 ? lam / (x + 1) - 1 : 1 - x / lam; }
  double kernel(int ell, double x) const override { return ell == 1 ? x : lam; }
  double draw(std::mt19937_64& rng) const override {
    return static_cast<double>(std::poisson_distribution<long>(lam)(rng));
  }
};

class Binomial : public LatticeModel {
 public:
  int n;
  double theta;
  Binomial(int n_, double th) : n(n_), theta(th) {}
  double k_hi() const override { return n; }
  double log_pmf(long k) const override {
    if (k < 0 || k > n) return -kInf;
    return log_choose(n, k) + k * std::log(theta) + (n - k) * std::log1p(-theta);
  }
  double log_cdf_k(long k) const override {
    if (k < 0) return -kInf;
    if (k >= n) return 0.0;
    return sp::log_ibeta(1 - theta, n - k, k + 1.0);
  }
  double log_sf_k(long k) const override {
    if (k < 0) return 0.0;
    if (k >= n) return -kInf;
    return sp::log_ibeta(theta, k + 1.0, n - k);
  }
  double closed_mean() const override { return n * theta; }
  double score(int ell, double x) const override {
    if (ell == 1) return ((n + 1) * theta - (x + 1)) / ((x + 1) * (1 - theta));
    return ((n + 1) * theta - x) / (theta * (n + 1 - x));
  }
  double kernel(int ell, double x) const override { return ell == 1 ? (1 - theta) * x : theta * (n - x); }
  double draw(std::mt19937_64& rng) const override {
    return static_cast<double>(std::binomial_distribution<int>(n, theta)(rng));
  }
};

class NegBinomial final : public LatticeModel {
 public:
  double r, theta;
  NegBinomial(double r_, double th) : r(r_), theta(th) {}
  double log_pmf(long k) const override {
    if (k < 0) return -kInf;
    return r * std::log1p(-theta) + k * std::log(theta) + sp::log_gamma(k + r) - sp::log_gamma(k + 1.0) -
           sp::log_gamma(r);
  }
  double log_cdf_k(long k) const override { return k < 0 ? -kInf : sp::log_ibeta(1 - theta, r, k + 1.0); }
  double log_sf_k(long k) const override { return k < 0 ? 0.0 : sp::log_ibeta(theta, k + 1.0, r); }
  double closed_mean() const override { return theta * r / (1 - theta); }
  double score(int ell, double x) const override {
    return ell == 1 ? (x + r) * theta / (x + 1) - 1 : 1 - x / (theta * (x - 1 + r));
  }
  double kernel(int ell, double x) const override { return ell == 1 ? x / (1 - theta) : theta * (r + x) / (1 - theta); }
  double draw(std::mt19937_64& rng) const override {
    double g = std::gamma_distribution<double>(r, theta / (1 - theta))(rng);
    return static_cast<double>(std::poisson_distribution<long>(g)(rng));
  }
};

class Hypergeometric final : public LatticeModel {
 public:
  int n, K, N, kmin, kmax;
  std::vector<double> pmf, lower, upper;  // lower[i] = P(X <= kmin+i), upper[i] = P(X > kmin+i)
  Hypergeometric(int n_, int K_, int N_) : n(n_), K(K_), N(N_), kmin(std::max(0, n_ + K_ - N_)), kmax(std::min(n_, K_)) {
    for (int k = kmin; k <= kmax; ++k)
      pmf.push_back(std::exp(log_choose(K, k) + log_choose(N - K, n - k) - log_choose(N, n)));
    lower.resize(pmf.size());
    upper.resize(pmf.size());
    double s = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) lower[i] = (s += pmf[i]);
    s = 0.0;
    for (std::size_t i = pmf.size(); i-- > 0;) {
      upper[i] = s;
      s += pmf[i];
    }
  }
  double k_lo() const override { return kmin; }
  double k_hi() const override { return kmax; }
  double log_pmf(long k) const override {
    if (k < kmin || k > kmax) return -kInf;
    return log_choose(K, k) + log_choose(N - K, n - k) - log_choose(N, n);
  }
  double cdf_k(long k) const override {
    if (k < kmin) return 0.0;
    if (k >= kmax) return 1.0;
    return lower[k - kmin];
  }
  double sf_k(long k) const override {
    if (k < kmin) return 1.0;
    if (k >= kmax) return 0.0;
    return upper[k - kmin];
  }
  double closed_mean() const override { return static_cast<double>(n) * K / N; }
  double draw(std::mt19937_64& rng) const override {
    double u = uniform01(rng);
    for (int k = kmin; k <= kmax; ++k)
      if (u <= lower[k - kmin]) return k;
    return kmax;
  }
};

class StdBinomial final : public Binomial {
 public:
  double rn;
  StdBinomial(int n_, double th) : Binomial(n_, th), rn(std::sqrt(n_ * th * (1 - th))) {}
  double origin() const override { return -n * theta / rn; }
  double step() const override { return 1.0 / rn; }
  double closed_mean() const override { return 0.0; }
  double score(int, double) const override { return kNaN; }
  double kernel(int, double) const override { return kNaN; }
  double draw(std::mt19937_64& rng) const override { return (Binomial::draw(rng) - n * theta) / rn; }
};

}  // namespace
}  // namespace detail

// ------------------------------------------------------------------ handle

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

bool is_int(double v) { return std::isfinite(v) && v == std::floor(v); }

}  // namespace

Distribution::Distribution(std::shared_ptr<const detail::Model> m) : m_(std::move(m)) {}

namespace {

template <class M, class... A>
std::shared_ptr<detail::Model> make_model(Family f, std::string label, std::vector<double> params, A&&... args) {
  auto m = std::make_shared<M>(std::forward<A>(args)...);
  m->family = f;
  m->params = std::move(params);
  m->label = std::move(label);
  return m;
}

std::string label_of(const char* name, const std::vector<double>& ps) {
  std::string s = name;
  s += '(';
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) s += ',';
    s += fmt_num(ps[i]);
  }
  return s + ')';
}

// bisection on a monotone predicate over lattice indices: first k in [a,b] with pred(k) true
template <class Pred>
long first_true(long a, long b, Pred pred) {
  while (a < b) {
    long m = a + (b - a) / 2;
    if (pred(m))
      b = m;
    else
      a = m + 1;
  }
  return a;
}

}  // namespace


Distribution Distribution::adopt(std::shared_ptr<detail::Model> m) {
  Distribution d(m);
  if (m->lattice()) {
    // lattice indices carrying all but kLatticeTail of the mass on each side
    double klo = m->k_lo(), khi = m->k_hi();
    long a = static_cast<long>(klo);
    long mid = static_cast<long>(std::floor((m->closed_mean() - m->origin()) / m->step()));
    mid = std::max(mid, a);
    if (std::isfinite(khi)) mid = std::min(mid, static_cast<long>(khi));
    m->k_first = first_true(a, mid, [&](long k) { return m->cdf_k(k) >= kLatticeTail; });
    long b = mid;
    long span = 16;
    while (!(m->sf_k(b) < kLatticeTail) && (!std::isfinite(khi) || b < khi)) {
      b = mid + span;
      if (std::isfinite(khi)) b = std::min(b, static_cast<long>(khi));
      span *= 2;
    }
    m->k_last = first_true(mid, b, [&](long k) { return m->sf_k(k) < kLatticeTail; });
    double mu = m->closed_mean();
    m->mean_ = mu;
  } else {
    m->body_lo = std::max(m->lo(), d.quantile(kBodyTail));
    m->body_hi = std::min(m->hi(), d.quantile(1.0 - kBodyTail));
    for (double u : {1e-9, 1e-6, 1e-3, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 0.999, 1 - 1e-6, 1 - 1e-9}) {
      double q = d.quantile(u);
      if (q > m->body_lo && q < m->body_hi) m->body_breaks.push_back(q);
    }
    double mu = m->closed_mean();
    if (std::isnan(mu)) mu = d.expect([](double x) { return x; });
    m->mean_ = mu;
  }
  return d;
}

Distribution Distribution::normal(double mu, double sigma) {
  require(std::isfinite(mu) && sigma > 0, "normal: need sigma > 0");
  return adopt(make_model<detail::Normal>(Family::Normal, label_of("normal", {mu, sigma}), {mu, sigma}, mu, sigma));
}
Distribution Distribution::exponential(double lambda) {
  require(lambda > 0, "exponential: need lambda > 0");
  return adopt(make_model<detail::Exponential>(Family::Exponential, label_of("exponential", {lambda}), {lambda}, lambda));
}
Distribution Distribution::gamma(double r, double lambda) {
  require(r > 0 && lambda > 0, "gamma: need r > 0, lambda > 0");
  return adopt(make_model<detail::GammaLaw>(Family::Gamma, label_of("gamma", {r, lambda}), {r, lambda}, r, lambda));
}
Distribution Distribution::beta(double a, double b) {
  require(a > 0 && b > 0, "beta: need a, b > 0");
  return adopt(make_model<detail::BetaLaw>(Family::Beta, label_of("beta", {a, b}), {a, b}, a, b));
}
Distribution Distribution::student(double nu) {
  require(nu > 1, "student: need nu > 1");
  return adopt(make_model<detail::Student>(Family::StudentT, label_of("student", {nu}), {nu}, nu));
}
Distribution Distribution::frechet(double alpha) {
  require(alpha > 0, "frechet: need alpha > 0");
  return adopt(make_model<detail::Frechet>(Family::Frechet, label_of("frechet", {alpha}), {alpha}, alpha));
}
Distribution Distribution::rayleigh() {
  return adopt(make_model<detail::Rayleigh>(Family::Rayleigh, "rayleigh()", {}));
}
Distribution Distribution::poisson(double lambda) {
  require(lambda > 0, "poisson: need lambda > 0");
  return adopt(make_model<detail::Poisson>(Family::Poisson, label_of("poisson", {lambda}), {lambda}, lambda));
}
Distribution Distribution::binomial(int n, double theta) {
  require(n >= 1 && theta > 0 && theta < 1, "binomial: need n >= 1, 0 < theta < 1");
  return adopt(make_model<detail::Binomial>(Family::Binomial, label_of("binomial", {double(n), theta}),
                                            {double(n), theta}, n, theta));
}
Distribution Distribution::negbinomial(double r, double theta) {
  require(r > 0 && theta > 0 && theta < 1, "negbinomial: need r > 0, 0 < theta < 1");
  return adopt(make_model<detail::NegBinomial>(Family::NegBinomial, label_of("negbinomial", {r, theta}), {r, theta},
                                               r, theta));
}
Distribution Distribution::hypergeometric(int n, int K, int N) {
  require(N >= 1 && K >= 0 && K <= N && n >= 1 && n <= N, "hypergeometric: need 0 <= K <= N, 1 <= n <= N");
  return adopt(make_model<detail::Hypergeometric>(Family::Hypergeometric,
                                                  label_of("hypergeometric", {double(n), double(K), double(N)}),
                                                  {double(n), double(K), double(N)}, n, K, N));
}
Distribution Distribution::pareto_max(int n, double alpha) {
  require(n >= 1 && alpha > 0, "paretomax: need n >= 1, alpha > 0");
  return adopt(make_model<detail::ParetoMax>(Family::ScaledParetoMax, label_of("paretomax", {double(n), alpha}),
                                             {double(n), alpha}, n, alpha));
}
Distribution Distribution::std_binomial(int n, double theta) {
  require(n >= 1 && theta > 0 && theta < 1, "stdbinomial: need n >= 1, 0 < theta < 1");
  return adopt(make_model<detail::StdBinomial>(Family::StdBinomial, label_of("stdbinomial", {double(n), theta}),
                                               {double(n), theta}, n, theta));
}
Distribution Distribution::rayleigh_n(int n) {
  require(n >= 2, "rayleighn: need n >= 2");
  return adopt(make_model<detail::RayleighN>(Family::RayleighApproxN, label_of("rayleighn", {double(n)}), {double(n)}, n));
}

Distribution Distribution::parse(std::string_view spec) {
  std::string s;
  for (char c : spec)
    if (!std::isspace(static_cast<unsigned char>(c))) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  auto open = s.find('(');
  std::string name = s.substr(0, open);
  std::vector<double> args;
  if (open != std::string::npos) {
    if (s.back() != ')') throw std::invalid_argument("distribution spec: missing ')' in '" + std::string(spec) + "'");
    std::string inner = s.substr(open + 1, s.size() - open - 2);
    std::size_t pos = 0;
    while (!inner.empty() && pos <= inner.size()) {
      auto comma = inner.find(',', pos);
      std::string tok = inner.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      double v = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size())
        throw std::invalid_argument("distribution spec: bad number '" + tok + "'");
      args.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  auto want = [&](std::size_t k) {
    if (args.size() != k)
      throw std::invalid_argument(name + ": expected " + std::to_string(k) + " argument(s), got " +
                                  std::to_string(args.size()));
  };
  auto integer = [&](double v) {
    if (!is_int(v)) throw std::invalid_argument(name + ": expected an integer, got " + fmt_num(v));
    return static_cast<int>(v);
  };
  if (name == "normal") return want(2), normal(args[0], args[1]);
  if (name == "exponential") return want(1), exponential(args[0]);
  if (name == "gamma") return want(2), gamma(args[0], args[1]);
  if (name == "beta") return want(2), beta(args[0], args[1]);
  if (name == "student") return want(1), student(args[0]);
  if (name == "frechet") return want(1), frechet(args[0]);
  if (name == "rayleigh") return want(0), rayleigh();
  if (name == "poisson") return want(1), poisson(args[0]);
  if (name == "binomial") return want(2), binomial(integer(args[0]), args[1]);
  if (name == "negbinomial") return want(2), negbinomial(args[0], args[1]);
  if (name == "hypergeometric") return want(3), hypergeometric(integer(args[0]), integer(args[1]), integer(args[2]));
  if (name == "paretomax") return want(2), pareto_max(integer(args[0]), args[1]);
  if (name == "stdbinomial") return want(2), std_binomial(integer(args[0]), args[1]);
  if (name == "rayleighn") return want(1), rayleigh_n(integer(args[0]));
  throw std::invalid_argument("unknown distribution '" + name + "'");
}

Family Distribution::family() const { return m_->family; }
std::string Distribution::name() const { return m_->label; }
const std::vector<double>& Distribution::params() const { return m_->params; }
bool Distribution::is_lattice() const { return m_->lattice(); }
double Distribution::step() const { return m_->lattice() ? m_->step() : 0.0; }
double Distribution::origin() const { return m_->lattice() ? m_->origin() : 0.0; }

double Distribution::lo() const {
  if (!m_->lattice()) return m_->lo();
  return m_->origin() + m_->step() * m_->k_lo();
}
double Distribution::hi() const {
  if (!m_->lattice()) return m_->hi();
  double k = m_->k_hi();
  return std::isfinite(k) ? m_->origin() + m_->step() * k : kInf;
}

long Distribution::index(double x) const { return std::lround((x - m_->origin()) / m_->step()); }
double Distribution::point(long k) const { return m_->origin() + m_->step() * static_cast<double>(k); }

bool Distribution::in_support(double x) const {
  if (!m_->lattice()) return x >= m_->lo() && x <= m_->hi();
  long k = index(x);
  if (std::fabs(point(k) - x) > 1e-9 * m_->step()) return false;
  return k >= m_->k_lo() && k <= m_->k_hi();
}

double Distribution::log_pdf(double x) const {
  if (!m_->lattice()) return m_->log_pdf(x);
  long k = index(x);
  if (std::fabs(point(k) - x) > 1e-9 * m_->step()) return -kInf;
  return m_->log_pmf(k);
}
double Distribution::pdf(double x) const { return std::exp(log_pdf(x)); }
double Distribution::log_density(double x) const {
  return m_->lattice() ? log_pdf(x) - std::log(m_->step()) : log_pdf(x);
}
double Distribution::density(double x) const { return std::exp(log_density(x)); }

namespace {
// largest lattice index whose point is <= x
long floor_index(const detail::Model& m, double x) {
  double t = (x - m.origin()) / m.step();
  return static_cast<long>(std::floor(t + 1e-9));
}
}  // namespace

double Distribution::cdf(double x) const {
  if (!m_->lattice()) return m_->cdf(x);
  if (x == kInf) return 1.0;
  if (x == -kInf) return 0.0;
  return m_->cdf_k(floor_index(*m_, x));
}
double Distribution::sf(double x) const {
  if (!m_->lattice()) return m_->sf(x);
  if (x == kInf) return 0.0;
  if (x == -kInf) return 1.0;
  return m_->sf_k(floor_index(*m_, x));
}
double Distribution::log_cdf(double x) const {
  if (!m_->lattice()) return m_->log_cdf(x);
  if (x == kInf) return 0.0;
  if (x == -kInf) return -kInf;
  return m_->log_cdf_k(floor_index(*m_, x));
}
double Distribution::log_sf(double x) const {
  if (!m_->lattice()) return m_->log_sf(x);
  if (x == kInf) return -kInf;
  if (x == -kInf) return 0.0;
  return m_->log_sf_k(floor_index(*m_, x));
}

double Distribution::mean() const { return m_->mean_; }

double Distribution::quantile(double u) const {
  if (u <= 0) return lo();
  if (u >= 1) return hi();
  if (m_->lattice()) {
    long a = static_cast<long>(m_->k_lo());
    long b = a + 1;
    double khi = m_->k_hi();
    while (m_->cdf_k(b) < u && (!std::isfinite(khi) || b < khi)) b = a + 2 * (b - a);
    if (std::isfinite(khi)) b = std::min(b, static_cast<long>(khi));
    return point(first_true(a, b, [&](long k) { return m_->cdf_k(k) >= u; }));
  }
  double q = m_->quantile(u);
  if (!std::isnan(q)) return q;
  // bracket, then bisect on whichever of cdf/sf carries the precision
  double a = m_->lo(), b = m_->hi();
  double mid = std::isfinite(m_->closed_mean()) ? m_->closed_mean() : 0.0;
  if (!std::isfinite(a)) {
    double w = 1.0;
    a = std::min(mid, std::isfinite(b) ? b : mid) - w;
    while (m_->cdf(a) > u) a -= (w *= 2);
  }
  if (!std::isfinite(b)) {
    double w = 1.0;
    b = std::max(mid, a) + w;
    while (m_->sf(b) > 1 - u) b += (w *= 2);
  }
  auto f = u <= 0.5 ? quad::Fn([&](double x) { return m_->cdf(x) - u; })
                    : quad::Fn([&](double x) { return (1 - u) - m_->sf(x); });
  return quad::bisect(f, a, b, 1e-15);
}

double Distribution::score(int ell, double x) const {
  if (!in_support(x)) return 0.0;
  double v = m_->score(ell, x);
  if (!std::isnan(v)) return v;
  if (!m_->lattice()) {
    double h = 1e-3 * (1.0 + std::fabs(x));
    if (std::isfinite(lo())) h = std::min(h, 0.5 * (x - lo()));
    if (std::isfinite(hi())) h = std::min(h, 0.5 * (hi() - x));
    return quad::derivative([this](double u) { return log_pdf(u); }, x, h);
  }
  double s = m_->step();
  double lp = log_pdf(x + ell * s);
  double ratio = std::isinf(lp) ? 0.0 : std::exp(lp - log_pdf(x));
  return (ratio - 1.0) / (ell * s);
}

bool Distribution::has_closed_kernel() const {
  double probe = m_->lattice() ? point(m_->k_first) : 0.5 * (m_->body_lo + m_->body_hi);
  return !std::isnan(m_->kernel(m_->lattice() ? 1 : 0, probe));
}

double Distribution::stein_kernel(int ell, double x) const {
  if (!in_support(x)) return 0.0;
  double v = m_->kernel(ell, x);
  if (!std::isnan(v)) return v;
  double mu = mean();
  if (!std::isfinite(mu)) return kNaN;
  double lp = log_density(x);
  if (m_->lattice()) {
    double s = m_->step();
    // lighter side of the lattice; lower form sums u <= x - a_ℓ s, upper form u >= x + b_ℓ s
    if (cdf(x) <= 0.5) {
      double acc = integrate([&](double u) { return (mu - u) * density(u); }, -kInf, x - a_ell(ell) * s);
      return acc / std::exp(lp);
    }
    double acc = integrate([&](double u) { return (u - mu) * density(u); }, x + b_ell(ell) * s, kInf);
    return acc / std::exp(lp);
  }
  quad::Options opt;
  opt.abs_tol = 1e-14;
  opt.rel_tol = 1e-12;
  if (cdf(x) <= 0.5)
    return integrate([&](double u) { return (mu - u) * density(u); }, -kInf, x, {}, opt) / std::exp(lp);
  return integrate([&](double u) { return (u - mu) * density(u); }, x, kInf, {}, opt) / std::exp(lp);
}

double Distribution::mills(int ell, double x) const {
  if (!m_->lattice()) {
    if (!in_support(x)) return 0.0;
    return std::exp(log_cdf(x) + log_sf(x) - log_density(x));
  }
  double s = m_->step();
  double y = x + ell * s, z = x - b_ell(ell) * s;
  if (!in_support(y)) return 0.0;
  double lc = log_cdf(z);
  if (std::isinf(lc)) return 0.0;
  return std::exp(lc + log_sf(z) - log_density(y));
}

double Distribution::mtilde(int ell, double x) const {
  double s = m_->lattice() ? m_->step() : 0.0;
  double y = x + ell * s;
  if (!in_support(y)) return 0.0;
  quad::Options opt;
  opt.abs_tol = 1e-13;
  opt.rel_tol = 1e-11;
  double left = integrate([this](double u) { return cdf(u); }, lo() + a_ell(ell) * s, y, {}, opt);
  double right = integrate([this](double u) { return sf(u); }, y, hi() - b_ell(ell) * s, {}, opt);
  return left * right / density(y);
}

std::pair<long, long> Distribution::index_range() const { return {m_->k_first, m_->k_last}; }
std::pair<double, double> Distribution::body() const { return {m_->body_lo, m_->body_hi}; }

double Distribution::integrate(const quad::Fn& f, double a, double b, const std::vector<double>& breaks,
                               const quad::Options& opt) const {
  if (m_->lattice()) {
    double s = m_->step();
    long k0 = m_->k_first, k1 = m_->k_last;
    if (a > -kInf) k0 = std::max(k0, static_cast<long>(std::ceil((a - m_->origin()) / s - 1e-9)));
    if (b < kInf) k1 = std::min(k1, floor_index(*m_, b));
    // Neumaier-compensated sum
    double sum = 0.0, comp = 0.0;
    for (long k = k0; k <= k1; ++k) {
      double v = f(point(k));
      double t = sum + v;
      comp += std::fabs(sum) >= std::fabs(v) ? (sum - t) + v : (v - t) + sum;
      sum = t;
    }
    return s * (sum + comp);
  }
  a = std::max(a, m_->lo());
  b = std::min(b, m_->hi());
  if (!(a < b)) return 0.0;
  std::vector<double> pts{a, b};
  for (double c : {m_->body_lo, m_->body_hi})
    if (c > a && c < b) pts.push_back(c);
  for (double c : m_->body_breaks)
    if (c > a && c < b) pts.push_back(c);
  for (double c : breaks)
    if (c > a && c < b) pts.push_back(c);
  double scale = std::isfinite(m_->body_hi - m_->body_lo) ? std::max(1e-3, 0.05 * (m_->body_hi - m_->body_lo)) : 1.0;
  return quad::integrate_pieces(f, pts, opt, scale).value;
}

double Distribution::expect(const quad::Fn& f, const std::vector<double>& breaks, const quad::Options& opt) const {
  return integrate([&](double u) {
    double p = density(u);
    return p == 0.0 ? 0.0 : f(u) * p;
  }, -kInf, kInf, breaks, opt);
}

std::vector<double> Distribution::sample(std::size_t n, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = m_->draw(rng);
  return out;
}

}  // namespace stein
