#include <gtest/gtest.h>

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numbers>

#include "catalog.hpp"
#include "stein/operators.hpp"

using namespace stein;

namespace {

double tol(double ref, double t) { return t * (1 + std::fabs(ref)); }

TEST(Difference, ForwardBackwardAndDerivative) {
  EXPECT_DOUBLE_EQ(difference(1, [](double x) { return x; }, 5, 1), 1.0);
  EXPECT_DOUBLE_EQ(difference(-1, [](double x) { return x * x; }, 3, 1), 5.0);
  EXPECT_NEAR(difference(0, [](double x) { return std::sin(x); }, 0, 0), 1.0, 1e-8);
}

TEST(CanonicalOperator, PrintedDrifts) {
  auto n = Distribution::normal(0, 1);
  for (double x : {-2.0, 0.3, 1.7}) EXPECT_NEAR(canonical_apply(n, 0, [](double) { return 1.0; }, x), -x, 1e-8);

  double lam = 1.6;
  auto e = Distribution::exponential(lam);
  for (double x : {0.2, 1.0, 3.0})
    EXPECT_NEAR(canonical_apply(e, 0, [=](double u) { return u / lam; }, x), -(x - 1 / lam), 1e-8);

  auto p = Distribution::poisson(lam);
  for (int x = 0; x < 10; ++x)
    EXPECT_NEAR(canonical_apply(p, -1, [=](double) { return lam; }, x), lam - x, 1e-12);
}

TEST(CanonicalInverse, ConstantsAndIdentity) {
  auto n = Distribution::normal(0, 1);
  auto p = Distribution::poisson(2.5);
  for (double x : {-1.0, 0.0, 2.5}) {
    EXPECT_NEAR(canonical_inverse(n, 0, TestFunction::constant(3.0), x), 0.0, 1e-14);
    EXPECT_NEAR(canonical_inverse(n, 0, TestFunction::identity(), x), -1.0, 1e-9);
  }
  for (int x = 0; x < 12; ++x) EXPECT_NEAR(canonical_inverse(p, -1, TestFunction::identity(), x), -2.5, 1e-10);
  EXPECT_EQ(canonical_inverse(p, 1, TestFunction::identity(), -1.0), 0.0);
}

TEST(Kernels, SymmetryAndBranches) {
  auto n = Distribution::normal(0, 1);
  for (double x : {-1.2, 0.4})
    for (double y : {-0.3, 2.0}) EXPECT_DOUBLE_EQ(kernel_ktilde(n, 0, x, y), kernel_ktilde(n, 0, y, x));
  // ℓ = 0, x = y: P P̄ / p²
  double x = 0.7;
  EXPECT_NEAR(kernel_ktilde(n, 0, x, x), n.mills(0, x) / n.pdf(x), 1e-13);
  double y = 1.3;
  EXPECT_NEAR(kernel_r(n, 0, x, y), -n.sf(y) / n.pdf(y), 1e-14);
  EXPECT_NEAR(kernel_r(n, 0, y, x), n.cdf(x) / n.pdf(x), 1e-14);
}

// ------------------------------------------------------------ catalog-wide

class OperatorCatalog : public ::testing::TestWithParam<std::string> {
 protected:
  Distribution d = Distribution::parse(GetParam());
  std::vector<int> ells() const { return d.is_lattice() ? std::vector<int>{-1, 1} : std::vector<int>{0}; }
  std::vector<double> grid(int n) const { return stein::testing::interior_grid(d, n, 1e-3); }
};

TEST_P(OperatorCatalog, InverseProperty) {
  double med = d.quantile(0.5);
  std::vector<TestFunction> hs = {TestFunction::identity(),
                                  TestFunction::lipschitz([](double x) { return x * x; }, {}, 0, "square"),
                                  TestFunction::half_line(med + (d.is_lattice() ? 0.0 : 1e-3))};
  if (d.is_lattice()) hs.push_back(TestFunction::point_mass(med));
  for (const auto& h : hs) {
    double m = h.mean(d);
    for (int ell : ells()) {
      for (double x : grid(100)) {
        if (!d.is_lattice() && std::fabs(x - med) < 1e-2) continue;  // jump of the half line
        double v = canonical_apply(d, ell, [&](double u) { return canonical_inverse(d, ell, h, u); }, x);
        EXPECT_NEAR(v, h(x) - m, tol(h(x) - m, 1e-8)) << h.label() << " ell=" << ell << " x=" << x;
      }
    }
  }
}

TEST_P(OperatorCatalog, KernelExpectations) {
  for (int ell : ells()) {
    for (double x : grid(25)) {
      double kt = d.expect([&](double u) { return kernel_ktilde(d, ell, x, u); }, {x});
      double r = d.expect([&](double u) { return kernel_r(d, ell, x, u); }, {x});
      double tau = d.stein_kernel(ell, x);
      EXPECT_NEAR(kt, tau, tol(tau, 1e-8)) << "x=" << x << " ell=" << ell;
      EXPECT_NEAR(r, x - d.mean(), tol(x, 1e-8)) << "x=" << x << " ell=" << ell;
    }
  }
}

TEST_P(OperatorCatalog, SolutionsSolveTheSteinEquation) {
  double med = d.quantile(0.4);
  for (int ell : ells()) {
    std::vector<SteinContext> ctxs = {SteinContext::one(d, ell), SteinContext::kernel(d, ell)};
    for (const auto& ctx : ctxs) {
      for (const auto& h : {TestFunction::half_line(med), TestFunction::identity()}) {
        auto sol = solve(ctx, h);
        for (double x : grid(40)) {
          if (!d.is_lattice() && std::fabs(x - med) < 1e-9) continue;
          if (ctx.c(x) == 0.0) continue;
          EXPECT_NEAR(sol.residual(x), 0.0, tol(sol.hbar(x), 1e-8)) << ctx.label() << " " << h.label() << " x=" << x;
        }
      }
    }
  }
}

TEST_P(OperatorCatalog, ClosedFormMatchesGenericPath) {
  for (double u : {0.2, 0.5, 0.8}) {
    double xi = d.quantile(u);
    auto closed = TestFunction::half_line(xi);
    auto generic = TestFunction::generic([xi](double x) { return x <= xi ? 1.0 : 0.0; }, 1.0);
    // the generic path needs the jump as a breakpoint; route it through an interval indicator
    auto via_interval = TestFunction::indicator(std::vector<Interval>{{d.lo() - 1, xi}});
    for (int ell : ells()) {
      auto ctx = SteinContext::one(d, ell);
      auto a = solve(ctx, closed), b = solve(ctx, d.is_lattice() ? generic : via_interval);
      for (double x : grid(60)) {
        double t = d.is_lattice() ? 1e-12 : 1e-8;
        EXPECT_NEAR(a.g(x), b.g(x), tol(a.g(x), t)) << "xi=" << xi << " x=" << x;
      }
    }
  }
}

TEST_P(OperatorCatalog, RepresentationFormulae) {
  double xi = d.quantile(0.55) + (d.is_lattice() ? 0.0 : 1e-3);
  std::vector<TestFunction> hs = {TestFunction::half_line(xi), TestFunction::identity()};
  if (d.is_lattice()) hs.push_back(TestFunction::point_mass(d.quantile(0.3)));
  double limit = d.is_lattice() ? 1e-10 : 1e-6;
  for (int ell : ells()) {
    for (const auto& ctx : {SteinContext::one(d, ell), SteinContext::kernel(d, ell)}) {
      for (const auto& h : hs) {
        for (double x : stein::testing::interior_grid(d, 12, 0.02)) {
          auto r = representation_check(ctx, h, x);
          double scale = 1 + std::fabs(r.g_direct) + std::fabs(r.dg_direct);
          EXPECT_LT(r.max_dev, limit * scale) << ctx.label() << " " << h.label() << " x=" << x;
        }
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Catalog, OperatorCatalog, ::testing::ValuesIn(stein::testing::catalog_specs()),
                         [](const auto& info) {
                           std::string s;
                           for (char c : info.param)
                             if (std::isalnum(static_cast<unsigned char>(c))) s += c;
                           return s;
                         });

// ------------------------------------------------------------ worked cases

TEST(Solve, GaussianHalfLineAtZero) {
  auto sol = solve(SteinContext::one(Distribution::normal(0, 1), 0), TestFunction::half_line(0.0));
  EXPECT_NEAR(sol.g(0.0), 0.5 * std::sqrt(std::numbers::pi / 2), 1e-14);
  // printed derivative: (1[x<=ξ] - P(ξ))/c - T c /c² · P(ξ∧x)P̄(ξ∨x)/p(x), T c = -x
  boost::math::normal z;
  for (double x : {-2.0, -0.5, 0.8, 3.0}) {
    double pp = boost::math::cdf(z, std::min(x, 0.0)) * boost::math::cdf(boost::math::complement(z, std::max(x, 0.0)));
    double ref = ((x <= 0 ? 1.0 : 0.0) - 0.5) + x * pp / boost::math::pdf(z, x);
    EXPECT_NEAR(sol.dg(x), ref, 1e-13);
  }
}

TEST(Solve, ConstantTestFunctionGivesZero) {
  for (const char* spec : {"normal(0,1)", "poisson(3)", "beta(2,3)"}) {
    auto d = Distribution::parse(spec);
    int ell = d.is_lattice() ? 1 : 0;
    auto sol = solve(SteinContext::kernel(d, ell), TestFunction::constant(2.0));
    for (double x : stein::testing::interior_grid(d, 20)) EXPECT_NEAR(sol.g(x), 0.0, 1e-12);
  }
}

TEST(Solve, PoissonPointMassAgainstPartialSums) {
  double lam = 3.0;
  auto d = Distribution::poisson(lam);
  auto h = TestFunction::point_mass(2);
  auto sol = solve(SteinContext::kernel(d, -1), h);
  double p2 = d.pdf(2);
  for (int x = 1; x < 25; ++x) {
    // g₂⁻(x) = Σ_{j<=x-1} (h(j) - E h) p(j) / (λ p(x-1)); past the atom the
    // complementary sum -Σ_{j>=x} avoids cancellation
    double acc = 0.0;
    if (x <= 3)
      for (int j = 0; j <= x - 1; ++j) acc += ((j == 2) - p2) * d.pdf(j);
    else
      for (int j = 200; j >= x; --j) acc += p2 * d.pdf(j);
    EXPECT_NEAR(sol.g(x), acc / (lam * d.pdf(x - 1)), 1e-12) << x;
  }
  EXPECT_EQ(sol.g(0), 0.0);
}

TEST(Solve, PointMassDerivativeUnderKernelStandardization) {
  for (const char* spec : {"poisson(3)", "binomial(12,0.3)", "negbinomial(2.5,0.4)"}) {
    auto d = Distribution::parse(spec);
    auto [k0, k1] = d.index_range();
    for (double xi : {1.0, 2.0, 4.0}) {
      auto h = TestFunction::point_mass(xi);
      auto gp = solve(SteinContext::kernel(d, 1), h);
      auto gm = solve(SteinContext::kernel(d, -1), h);
      double pxi = d.pdf(xi);
      for (long x = std::max(k0, 1L); x < std::min(k1, 25L); ++x) {
        // g⁺(x) = g⁻(x+1), Δ⁻g⁺ = Δ⁺g⁻, and the closed form of the common derivative
        EXPECT_NEAR(gp.g(x), gm.g(x + 1), 1e-12);
        EXPECT_NEAR(gp.dg(x), gm.dg(x), 1e-12);
        double tp = d.stein_kernel(1, x), tm = d.stein_kernel(-1, x);
        // 1{x >= ξ} - P(x), summed on the side that does not cancel
        double tail = 0.0;
        if (x >= xi)
          for (long j = x + 300; j > x; --j) tail += d.pdf(j);
        else
          for (long j = k0; j <= x; ++j) tail -= d.pdf(j);
        double ref = ((x == xi) - pxi) / tp + pxi * tail / d.pdf(x) * (1 / tm - 1 / tp);
        EXPECT_NEAR(gp.dg(x), ref, 1e-10 * (1 + std::fabs(ref))) << spec << " xi=" << xi << " x=" << x;
      }
    }
  }
}

TEST(Solve, BorelSetIsSumOfPointMasses) {
  auto d = Distribution::binomial(15, 0.4);
  std::vector<double> pts = {2, 5, 6, 11};
  for (int ell : {-1, 1}) {
    auto ctx = SteinContext::one(d, ell);
    auto set = solve(ctx, TestFunction::indicator(pts));
    for (int x = 0; x <= 15; ++x) {
      double sum = 0.0;
      for (double p : pts) sum += solve(ctx, TestFunction::point_mass(p)).g(x);
      EXPECT_NEAR(set.g(x), sum, 1e-14);
    }
  }
}

TEST(Solve, LatticeEndpointConvention) {
  auto d = Distribution::poisson(2.0);
  auto h = TestFunction::half_line(1.0);
  auto plus = solve(SteinContext::one(d, 1), h);
  auto minus = solve(SteinContext::one(d, -1), h);
  // Δ^{-ℓ} g(a) = g(a + b_ℓ)
  EXPECT_DOUBLE_EQ(plus.dg(0), plus.g(0));
  EXPECT_DOUBLE_EQ(minus.dg(0), minus.g(1));
}

TEST(Representation, ConstantIsZeroEverywhere) {
  auto d = Distribution::normal(0, 1);
  auto r = representation_check(SteinContext::kernel(d, 0), TestFunction::constant(1.5), 0.4);
  EXPECT_NEAR(r.sol1, 0.0, 1e-14);
  EXPECT_NEAR(r.sol2, 0.0, 1e-14);
  EXPECT_NEAR(r.der2, 0.0, 1e-14);
  EXPECT_NEAR(r.dersol2, 0.0, 1e-14);
}

TEST(IdentityResidual, QuadratureAndMonteCarlo) {
  auto n = Distribution::normal(0, 1);
  EXPECT_NEAR(identity_residual(SteinContext::one(n, 0), [](double x) { return x * x; }).value, 0.0, 1e-9);

  auto e = SteinContext::kernel(Distribution::exponential(1.0), 0);  // c = x
  EXPECT_NEAR(identity_residual(e, [](double x) { return std::sin(x) / (1 + x); }).value, 0.0, 1e-8);

  auto p = SteinContext::kernel(Distribution::poisson(3.0), -1);  // c = λ
  EXPECT_NEAR(identity_residual(p, [](double x) { return x; }).value, 0.0, 1e-10);
  auto mc = identity_residual(p, [](double x) { return x * x; }, 200000, 1);
  EXPECT_LT(std::fabs(mc.value), 5 * mc.stderr_);
}

TEST(Context, RejectsWrongDirection) {
  EXPECT_THROW(SteinContext::one(Distribution::normal(0, 1), 1), std::invalid_argument);
  EXPECT_THROW(SteinContext::one(Distribution::poisson(1), 0), std::invalid_argument);
  auto e = SteinContext::one(Distribution::exponential(1), 0);
  EXPECT_FALSE(e.has_eta());  // c = 1 is outside the Stein class for the exponential
  EXPECT_TRUE(SteinContext::one(Distribution::normal(0, 1), 0).has_eta());
}

}  // namespace
