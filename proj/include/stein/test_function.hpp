#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stein/distribution.hpp"

namespace stein {

enum class TestKind { HalfLine, PointMass, Indicator, Lipschitz, Generic };

//! closed interval [lo, hi]
struct Interval {
  double lo, hi;
};

// Test function h with the metadata the factor bounds need.
class TestFunction {
 public:
  using Fn = std::function<double(double)>;

  //! 1[x <= xi]
  static TestFunction half_line(double xi);
  //! 1[x == xi], lattice targets
  static TestFunction point_mass(double xi);
  //! indicator of a finite set of lattice points
  static TestFunction indicator(std::vector<double> points);
  //! indicator of a union of closed intervals
  static TestFunction indicator(std::vector<Interval> intervals);
  //! |h'| <= k; dh may be empty, then differences are numeric
  static TestFunction lipschitz(Fn h, Fn dh, double k, std::string label = "lipschitz");
  static TestFunction generic(Fn h, std::optional<double> kappa1 = {}, std::optional<double> kappa2 = {},
                              std::string label = "generic");
  static TestFunction identity();
  static TestFunction constant(double v);

  TestKind kind() const { return kind_; }
  double xi() const { return xi_; }
  const std::vector<double>& points() const { return points_; }
  const std::vector<Interval>& intervals() const { return intervals_; }
  const std::string& label() const { return label_; }

  double operator()(double x) const;

  //! sup h - inf h
  std::optional<double> kappa1() const { return kappa1_; }
  //! sup |Δ^{-ℓ} h| on the support of d (1/step for indicators on a lattice)
  std::optional<double> kappa2(const Distribution& d) const;

  //! Δ^{-ℓ}h(x); step 0 means the derivative
  double delta(int ell, double x, double step) const;
  //! kinks/jumps worth splitting quadrature at
  std::vector<double> breaks() const;
  bool is_indicator() const;

  double mean(const Distribution& d) const;
  //! P(A ∩ (-∞, z]) for indicator-type h
  double mass_below(const Distribution& d, double z) const;
  double mass_above(const Distribution& d, double z) const;
  //! ∫_{u <= z} (h - E h) p dμ, divided by p(y); assembled from the lighter side
  double partial_ratio(const Distribution& d, double z, double y, double mean_h) const;

 private:
  TestKind kind_ = TestKind::Generic;
  double xi_ = 0.0;
  std::vector<double> points_;
  std::vector<Interval> intervals_;
  Fn h_, dh_;
  std::optional<double> kappa1_, kappa2_;
  std::string label_;
};

}  // namespace stein
