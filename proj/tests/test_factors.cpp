#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "catalog.hpp"
#include "stein/factors.hpp"

using namespace stein;

namespace {

std::vector<SteinContext> contexts(const Distribution& d) {
  std::vector<SteinContext> out;
  for (int ell : d.is_lattice() ? std::vector<int>{-1, 1} : std::vector<int>{0}) {
    out.push_back(SteinContext::one(d, ell));
    if (std::isfinite(d.mean())) out.push_back(SteinContext::kernel(d, ell));
  }
  return out;
}

struct Worst {
  double excess = -1, x = 0, value = 0, bound = 0;
};

Worst worst_excess(const FactorBound& b, const SteinSolution& sol, const std::vector<double>& xs) {
  Worst w;
  for (double x : xs) {
    double v = std::fabs(bounds_g(b.kind) ? sol.g(x) : sol.dg(x));
    double bb = b(x);
    if (v - bb > w.excess) w = {v - bb, x, v, bb};
  }
  return w;
}

// every applicable family dominates the exact half-line solution
class Dominance : public ::testing::TestWithParam<std::string> {};

TEST_P(Dominance, HalfLineSolutions) {
  auto d = Distribution::parse(GetParam());
  auto xs = stein::testing::interior_grid(d, 200);
  FactorOptions opt;
  opt.grid_n = 100;
  for (const auto& ctx : contexts(d)) {
    for (double q : {0.1, 0.5, 0.9}) {
      auto h = TestFunction::half_line(d.quantile(q));
      auto sol = solve(ctx, h);
      for (const auto& b : factor_bounds(ctx, h, opt)) {
        if (!b.applicable) continue;
        auto w = worst_excess(b, sol, xs);
        EXPECT_LE(w.excess, 1e-9) << ctx.label() << " ell=" << ctx.ell() << " " << h.label() << " " << b.name
                                  << " x=" << w.x << " value=" << w.value << " bound=" << w.bound;
        EXPECT_GE(b.pointwise(xs[xs.size() / 2]), 0.0);
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Catalog, Dominance, ::testing::ValuesIn(stein::testing::catalog_specs()),
                         [](const auto& info) {
                           std::string s;
                           for (char c : info.param) s += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
                           return s;
                         });

TEST(Dominance, LipschitzAndGeneric) {
  for (const char* spec : {"normal(0,1)", "gamma(3,2)", "beta(2,3)", "poisson(3)", "binomial(20,0.3)"}) {
    auto d = Distribution::parse(spec);
    double m = d.quantile(0.5);
    auto absdev = TestFunction::lipschitz([m](double x) { return std::fabs(x - m); },
                                          [m](double x) { return x > m ? 1.0 : -1.0; }, 1.0, "absdev");
    auto sine = TestFunction::generic([](double x) { return std::sin(x); }, 2.0, 1.0, "sin");
    auto xs = stein::testing::interior_grid(d, 60);
    for (const auto& ctx : contexts(d))
      for (const auto& h : {absdev, sine}) {
        auto sol = solve(ctx, h);
        for (const auto& b : factor_bounds(ctx, h, {.grid_n = 100})) {
          if (!b.applicable) continue;
          auto w = worst_excess(b, sol, xs);
          EXPECT_LE(w.excess, 1e-9) << spec << " " << ctx.label() << " " << h.label() << " " << b.name
                                    << " x=" << w.x;
        }
      }
  }
}

TEST(Uniform, AtLeastGridSup) {
  for (const char* spec : {"normal(1.5,2)", "exponential(2)", "student(5)", "poisson(40)", "negbinomial(2.5,0.4)"}) {
    auto d = Distribution::parse(spec);
    auto h = TestFunction::half_line(d.quantile(0.3));
    for (const auto& ctx : contexts(d))
      for (const auto& b : factor_bounds(ctx, h, {.grid_n = 100})) {
        if (!b.applicable) {
          EXPECT_FALSE(b.reason.empty());
          continue;
        }
        double sup = 0;
        for (double x : evaluation_grid(d, 100)) sup = std::max(sup, b(x));
        EXPECT_GE(b.uniform, sup) << spec << " " << b.name;
      }
  }
}

TEST(Uniform, UnboundedGrowthIsInfinite) {
  // c = 1 for the exponential: E|X - x|/c grows linearly
  auto d = Distribution::exponential(2);
  auto ctx = SteinContext::one(d, 0);
  auto bs = factor_bounds(ctx, TestFunction::generic([](double x) { return std::sin(x); }, 2.0, 1.0, "sin"));
  const auto* b = find(bs, BoundKind::DG_K2);
  ASSERT_NE(b, nullptr);
  EXPECT_TRUE(b->unbounded);
  EXPECT_TRUE(std::isinf(b->uniform));
}

// --------------------------------------------------------------- Gaussian

TEST(Normal, NonUniformBelowClassicalConstant) {
  auto d = Distribution::normal(0, 1);
  auto ctx = SteinContext::one(d, 0);
  auto bs = factor_bounds(ctx, TestFunction::half_line(0.4));
  const auto* g = find(bs, BoundKind::G_K1);
  ASSERT_NE(g, nullptr);
  const double c = 0.5 * std::sqrt(std::numbers::pi / 2);
  for (int i = 0; i <= 2000; ++i) {
    double x = -10 + 0.01 * i;
    EXPECT_LE(g->pointwise(x), c * (1 + 1e-12)) << x;
  }
  EXPECT_NEAR(g->uniform, c, 1e-9);
  EXPECT_NEAR(g->argmax, 0.0, 1e-4);
}

TEST(Normal, UniformMinimumOfBothConstants) {
  auto d = Distribution::normal(0, 1);
  auto ctx = SteinContext::one(d, 0);
  const double c = 0.5 * std::sqrt(std::numbers::pi / 2);
  for (auto [k1, k2] : {std::pair{1.0, 0.5}, std::pair{1.0, 3.0}, std::pair{2.0, 1.0}}) {
    auto h = TestFunction::generic([](double x) { return std::sin(x); }, k1, k2, "sin");
    auto bs = factor_bounds(ctx, h);
    const auto* m = find(bs, BoundKind::G_MIN);
    ASSERT_NE(m, nullptr);
    EXPECT_NEAR(m->uniform, std::min(k1 * c, k2), 1e-8);
  }
}

TEST(Normal, SpecializedDerivativeBound) {
  auto d = Distribution::normal(0, 1);
  auto sets = specialized_bounds(d, Standardization::One, 1.0, 1.0);
  ASSERT_EQ(sets.size(), 1u);
  const FactorBound* dg2 = nullptr;
  for (const auto& b : sets[0].curves)
    if (b.name == "normal:dg_eta_k2") dg2 = &b;
  ASSERT_NE(dg2, nullptr);
  for (double x : {-3.0, -0.5, 0.0, 0.2, 1.0, 4.0})
    EXPECT_LE(dg2->pointwise(x), 2 * std::sqrt(2 / std::numbers::pi) + 1e-12) << x;
}

// The displayed 2κ₂ min(√(2/π), |x|) vanishes at 0, but g'(0) = h(0) - Eh.
// h = |x| is 1-Lipschitz and gives |g'(0)| = E|X| = √(2/π): the |x| branch
// cannot hold, so the library never emits it.
TEST(Normal, AbsoluteValueBranchFailsAtOrigin) {
  auto d = Distribution::normal(0, 1);
  auto h = TestFunction::lipschitz([](double x) { return std::fabs(x); }, [](double x) { return x > 0 ? 1.0 : -1.0; },
                                   1.0, "abs");
  auto sol = solve(SteinContext::one(d, 0), h);
  EXPECT_NEAR(std::fabs(sol.dg(0.0)), std::sqrt(2 / std::numbers::pi), 1e-8);
  EXPECT_GT(std::fabs(sol.dg(0.0)), 2 * std::min(std::sqrt(2 / std::numbers::pi), 0.0));
}

// ------------------------------------------------------------ applicability

TEST(Applicability, ExponentialWithConstantCoefficient) {
  auto d = Distribution::exponential(1.5);
  auto ctx = SteinContext::one(d, 0);
  EXPECT_FALSE(ctx.has_eta());
  auto bs = factor_bounds(ctx, TestFunction::generic([](double x) { return std::cos(x); }, 2.0, 1.0, "cos"));
  for (auto k : {BoundKind::G_LIP, BoundKind::DG_ETA_K1, BoundKind::DG_ETA_K2}) {
    const auto* b = find(bs, k);
    ASSERT_NE(b, nullptr);
    EXPECT_FALSE(b->applicable) << to_string(k);
    EXPECT_FALSE(b->reason.empty());
  }
  for (auto k : {BoundKind::G_K1, BoundKind::DG_K1, BoundKind::G_K2, BoundKind::DG_K2})
    EXPECT_TRUE(find(bs, k)->applicable) << to_string(k);
}

TEST(Applicability, ExponentialPrintedCurves) {
  double lam = 1.5;
  auto d = Distribution::exponential(lam);
  double k1 = 1.0, k2 = 0.7;
  auto sets = specialized_bounds(d, Standardization::One, k1, k2);
  ASSERT_EQ(sets.size(), 1u);
  const FactorBound* gmin = nullptr;
  for (const auto& b : sets[0].curves)
    if (b.kind == BoundKind::G_MIN) gmin = &b;
  ASSERT_NE(gmin, nullptr);
  auto generic = factor_bounds(sets[0].ctx, TestFunction::generic([](double x) { return std::cos(x); }, k1, k2, "cos"));
  const auto* g = find(generic, BoundKind::G_MIN);
  for (double x : {0.05, 0.4, 1.0, 3.0, 8.0}) {
    double printed = std::min(k1 * -std::expm1(-lam * x), k2 * x) / lam;
    EXPECT_NEAR(gmin->pointwise(x), printed, 1e-13);
    EXPECT_NEAR(g->pointwise(x), printed, 1e-8 * (1 + printed)) << x;
  }
}

TEST(Applicability, VanishingCoefficient) {
  auto d = Distribution::normal(0, 1);
  auto ctx = SteinContext::custom(d, 0, [](double x) { return x; }, [](double) { return 1.0; }, "x");
  auto bs = factor_bounds(ctx, TestFunction::half_line(0.0));
  for (const auto& b : bs) {
    EXPECT_FALSE(b.applicable);
    EXPECT_NE(b.reason.find("not positive"), std::string::npos);
  }
}

TEST(Applicability, IndicatorOnContinuousHasNoKappa2) {
  auto d = Distribution::gamma(3, 2);
  auto bs = factor_bounds(SteinContext::kernel(d, 0), TestFunction::half_line(1.0));
  EXPECT_FALSE(find(bs, BoundKind::G_K2)->applicable);
  EXPECT_FALSE(find(bs, BoundKind::DG_ETA_K2)->applicable);
  EXPECT_TRUE(find(bs, BoundKind::DG_ETA_K1)->applicable);
  EXPECT_EQ(find(bs, BoundKind::G_MIN), nullptr);
}

// ------------------------------------------------------------------ Poisson

TEST(Poisson, Eq40StrictlyBelowClassical) {
  double lam = 10;
  auto d = Distribution::poisson(lam);
  auto sets = specialized_bounds(d, Standardization::Kernel, 1.0, 1.0);
  ASSERT_EQ(sets.size(), 1u);
  const FactorBound *gmin = nullptr, *dgmin = nullptr;
  for (const auto& b : sets[0].curves) {
    if (b.name == "poisson:g_min") gmin = &b;
    if (b.name == "poisson:dg_min_printed") dgmin = &b;
  }
  ASSERT_NE(gmin, nullptr);
  ASSERT_NE(dgmin, nullptr);
  double cap_g = std::min(1.0, std::sqrt(2 / lam));
  double cap_dg = std::min(1.0, 8 / (3 * std::sqrt(2 * std::numbers::e * lam)));
  auto [k0, k1] = d.index_range();
  for (long k = k0; k <= k1; ++k) {
    EXPECT_LT(gmin->pointwise(k), cap_g) << k;
    EXPECT_LE(dgmin->pointwise(k), cap_dg) << k;
  }
}

TEST(Poisson, Eq40MatchesGenericFamilies) {
  double lam = 10;
  auto d = Distribution::poisson(lam);
  auto ctx = SteinContext::kernel(d, -1);
  auto sets = specialized_bounds(d, Standardization::Kernel, 1.0, 1.0);
  auto bs = factor_bounds(ctx, TestFunction::generic([](double x) { return std::sin(x); }, 1.0, 1.0, "sin"));
  const FactorBound* gmin = nullptr;
  for (const auto& b : sets[0].curves)
    if (b.name == "poisson:g_min") gmin = &b;
  for (long k = 0; k < 30; ++k)
    EXPECT_NEAR(gmin->pointwise(k), find(bs, BoundKind::G_MIN)->pointwise(k), 1e-12) << k;
}

// --------------------------------------------------------------- point mass

TEST(PointMass, MonotoneRatioExamples) {
  EXPECT_TRUE(monotone_ratio_check(Distribution::poisson(10), 2).pass);
  auto b = Distribution::binomial(20, 0.3);
  for (int xi = 0; xi <= 20; ++xi) EXPECT_TRUE(monotone_ratio_check(b, xi).pass) << xi;
  // ξ at the right edge: nothing to check above it
  auto r = monotone_ratio_check(b, 20);
  EXPECT_TRUE(r.pass);
  EXPECT_FALSE(r.violation.has_value());
}

TEST(PointMass, NonUnitLatticeRejected) {
  EXPECT_THROW(discrete_pointmass_bounds(Distribution::parse("stdbinomial(50,0.3)"), 0.0), std::invalid_argument);
}

// ‖Δ⁺g_ξ‖ is attained: compare with the brute-force lattice sup
TEST(PointMass, LemmaIsExact) {
  for (const char* spec : {"poisson(10)", "poisson(3)", "binomial(20,0.3)", "negbinomial(2.5,0.4)"}) {
    auto d = Distribution::parse(spec);
    auto ctx = SteinContext::kernel(d, -1);
    auto [k0, k1] = d.index_range();
    for (long xi = k0 + 1; xi <= std::min(k1 - 1, k0 + 15); xi += 2) {
      auto pb = discrete_pointmass_bounds(d, xi);
      ASSERT_TRUE(pb.check.pass) << spec << " " << xi << " " << pb.check.diagnostic;
      auto sol = solve(ctx, TestFunction::point_mass(xi));
      double sg = 0, sdg = 0;
      for (long k = k0; k <= k1; ++k) {
        sg = std::max(sg, std::fabs(sol.g(k)));
        sdg = std::max(sdg, std::fabs(sol.dg(k)));
      }
      EXPECT_NEAR(pb.sup_dg, sdg, 1e-12) << spec << " ξ=" << xi;
      EXPECT_LE(sg, pb.sup_g + 1e-12) << spec << " ξ=" << xi;
      EXPECT_LE(pb.sup_dg, pb.sup_dg_case + 1e-12);
      EXPECT_LE(pb.sup_dg, pb.sup_dg_min + 1e-12);
    }
  }
}

TEST(PointMass, PoissonPrintedForms) {
  double lam = 10;
  auto d = Distribution::poisson(lam);
  for (int xi = 1; xi <= 25; ++xi) {
    auto pb = discrete_pointmass_bounds(d, xi);
    double a = d.cdf(xi - 1) / xi;
    EXPECT_NEAR(pb.sup_g, std::max(a, d.sf(xi) / lam), 1e-13) << xi;
    // the displayed Poisson form uses P̄(ξ-1) >= 1 - P(ξ): looser, still valid
    EXPECT_LE(pb.sup_g, std::max(a, d.sf(xi - 1) / lam) + 1e-15) << xi;
    EXPECT_NEAR(pb.sup_dg, a + d.sf(xi) / lam, 1e-13) << xi;
    EXPECT_LE(pb.sup_dg, std::min(1.0 / xi, -std::expm1(-lam) / lam) + 1e-13) << xi;
  }
}

TEST(PointMass, BinomialPrintedForm) {
  int n = 20;
  double th = 0.3;
  auto d = Distribution::binomial(n, th);
  for (int xi = 1; xi < n; ++xi) {
    auto pb = discrete_pointmass_bounds(d, xi);
    EXPECT_LE(pb.sup_dg, std::min(1 / (xi * (1 - th)), 1 / (th * (n - xi))) + 1e-13) << xi;
  }
}

TEST(PointMass, BorelSetsDominateSolutions) {
  auto d = Distribution::poisson(4);
  std::vector<double> A = {1, 2, 5, 9};
  auto bb = discrete_borel_bounds(d, A);
  ASSERT_TRUE(bb.check.pass);
  auto sol = solve(SteinContext::kernel(d, -1), TestFunction::indicator(A));
  double pa = 0, bmax = 0;
  for (double a : A) pa += d.pdf(a), bmax = std::max(bmax, pointmass_b(d, a));
  EXPECT_NEAR(bb.sup_dg, bmax, 1e-15);
  auto [k0, k1] = d.index_range();
  for (long k = k0; k <= k1; ++k) {
    EXPECT_LE(std::fabs(sol.g(k)), bb.sup_g + 1e-12) << k;
  }
  EXPECT_GT(pa, 0);
}

// ------------------------------------------------------------ specialised

// curves taken from correct printed formulas dominate the exact solutions;
// "_printed" curves keep known misprints and are only plotted
TEST(Specialized, CorrectCurvesDominate) {
  for (const auto& spec : stein::testing::catalog_specs()) {
    auto d = Distribution::parse(spec);
    auto xs = stein::testing::interior_grid(d, 120);
    for (auto st : {Standardization::One, Standardization::Kernel}) {
      for (const auto& set : specialized_bounds(d, st, 1.0, 1.0, {.grid_n = 60})) {
        // κ₁ = 1 and |h'| <= 1/2 <= κ₂ = 1
        std::vector<TestFunction> hs = {
            TestFunction::generic([](double x) { return 0.5 * std::sin(x); }, 1.0, 1.0, "sin/2")};
        for (double q : {0.2, 0.7}) hs.push_back(TestFunction::half_line(d.quantile(q)));
        for (const auto& h : hs) {
          auto sol = solve(set.ctx, h);
          bool indicator = h.is_indicator();
          for (const auto& b : set.curves) {
            if (b.name.find("printed") != std::string::npos) continue;
            // κ₂ curves only apply when Δh is bounded by 1
            bool uses_k2 = b.name.find("k2") != std::string::npos || b.kind == BoundKind::G_MIN ||
                           b.kind == BoundKind::DG_MIN || b.kind == BoundKind::DG_ETA_K2;
            if (indicator && uses_k2 && !d.is_lattice()) continue;
            auto w = worst_excess(b, sol, xs);
            EXPECT_LE(w.excess, 1e-9) << spec << " " << set.ctx.label() << " " << h.label() << " " << b.name
                                      << " x=" << w.x << " value=" << w.value << " bound=" << w.bound;
          }
        }
      }
    }
  }
}

TEST(Specialized, StudentAndFrechetPrinted) {
  double nu = 5;
  auto t = Distribution::student(nu);
  auto sets = specialized_bounds(t, Standardization::One, 1.0, 1.0);
  ASSERT_EQ(sets.size(), 1u);
  for (const auto& b : sets[0].curves)
    if (b.name == "student:dg1_k2_printed")
      for (double x : {0.5, 2.0}) EXPECT_NEAR(b.pointwise(x), std::fabs(x) * 2 * nu / (nu - 1), 1e-12);

  double a = 3;
  auto f = Distribution::frechet(a);
  auto fs = specialized_bounds(f, Standardization::Kernel, 1.0, 1.0);
  ASSERT_EQ(fs.size(), 1u);
  for (const auto& b : fs[0].curves)
    if (b.name == "frechet:g2_k1")
      for (double x : {0.7, 1.0, 2.5}) EXPECT_NEAR(b.pointwise(x), -std::expm1(-std::pow(x, -a)) / a, 1e-14);
}

// -------------------------------------------------------------------- csv

TEST(Export, CsvRows) {
  auto d = Distribution::poisson(3);
  auto bs = factor_bounds(SteinContext::kernel(d, -1), TestFunction::half_line(2));
  std::ostringstream os;
  std::vector<double> xs = {0, 1, 2};
  write_csv(os, bs, xs);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "x,bound_kind,value");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 2);
  }
  int applicable = 0;
  for (const auto& b : bs) applicable += b.applicable;
  EXPECT_EQ(rows, applicable * 3);
  EXPECT_NE(os.str().find("G_K1"), std::string::npos);
}

}  // namespace
