#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "stein/quadrature.hpp"

namespace stein {

enum class Family {
  Normal,
  Exponential,
  Gamma,
  Beta,
  StudentT,
  Frechet,
  Rayleigh,
  Poisson,
  Binomial,
  NegBinomial,
  Hypergeometric,
  ScaledParetoMax,
  StdBinomial,
  RayleighApproxN
};

namespace detail {
class Model;
}

// Immutable handle on one catalog law. Lattice laws live on origin + step*k;
// `pdf` is then the probability mass, `density` the mass divided by the step
// (density with respect to step * counting measure).
class Distribution {
 public:
  static Distribution normal(double mu, double sigma);
  static Distribution exponential(double lambda);
  static Distribution gamma(double r, double lambda);
  static Distribution beta(double a, double b);
  static Distribution student(double nu);
  static Distribution frechet(double alpha);
  static Distribution rayleigh();
  static Distribution poisson(double lambda);
  static Distribution binomial(int n, double theta);
  static Distribution negbinomial(double r, double theta);
  static Distribution hypergeometric(int n, int K, int N);
  static Distribution pareto_max(int n, double alpha);
  static Distribution std_binomial(int n, double theta);
  static Distribution rayleigh_n(int n);

  //! `name(p1,...)`; throws std::invalid_argument on bad input
  static Distribution parse(std::string_view spec);

  Family family() const;
  std::string name() const;
  const std::vector<double>& params() const;

  bool is_lattice() const;
  double step() const;    // 0 when continuous
  double origin() const;  // lattice origin
  double lo() const;      // support hull, possibly infinite
  double hi() const;
  bool in_support(double x) const;
  //! nearest lattice point index; only meaningful for lattice laws
  long index(double x) const;
  double point(long k) const;

  double pdf(double x) const;
  double log_pdf(double x) const;
  double density(double x) const;
  double log_density(double x) const;
  double cdf(double x) const;
  double sf(double x) const;  // P(X > x)
  double log_cdf(double x) const;
  double log_sf(double x) const;
  double mean() const;
  double quantile(double u) const;

  //! Δ^ℓ p / p
  double score(int ell, double x) const;
  //! -L^ℓ Id; closed form where one exists, quadrature otherwise
  double stein_kernel(int ell, double x) const;
  bool has_closed_kernel() const;
  //! P(x - b_ℓ) P̄(x - b_ℓ) / p(x + ℓ), assembled in log space
  double mills(int ell, double x) const;
  //! ∫_{a+a_ℓ}^{x+ℓ} P dμ ∫_{x+ℓ}^{b-b_ℓ} P̄ dμ / p(x+ℓ)
  double mtilde(int ell, double x) const;

  //! E f(X); continuous laws split at `breaks`
  double expect(const quad::Fn& f, const std::vector<double>& breaks = {}, const quad::Options& opt = {}) const;
  //! ∫ f dμ over [a, b] ∩ support (lattice: step * sum over points)
  double integrate(const quad::Fn& f, double a, double b, const std::vector<double>& breaks = {},
                   const quad::Options& opt = {}) const;
  //! lattice points carrying all but ~1e-16 of the mass in each tail
  std::pair<long, long> index_range() const;
  //! quantile-based body of a continuous law: [q(1e-13), q(1-1e-13)] ∩ support
  std::pair<double, double> body() const;

  std::vector<double> sample(std::size_t n, std::uint64_t seed) const;

 private:
  explicit Distribution(std::shared_ptr<const detail::Model> m);
  static Distribution adopt(std::shared_ptr<detail::Model> m);
  std::shared_ptr<const detail::Model> m_;
};

inline constexpr int a_ell(int ell) { return ell == 1 ? 1 : 0; }
inline constexpr int b_ell(int ell) { return ell == -1 ? 1 : 0; }

}  // namespace stein
