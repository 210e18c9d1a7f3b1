#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace stein::quad {

using Fn = std::function<double(double)>;

struct Options {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_depth = 50;
  int max_intervals = 4000;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
  int evaluations = 0;
};

//! Adaptive Gauss-Kronrod (7/15). Infinite limits are mapped onto [0,1);
//! `scale` sets the length scale of that map.
Result integrate(const Fn& f, double a, double b, const Options& opt = {}, double scale = 1.0);

//! Piecewise integration over the sorted breakpoints (endpoints included).
Result integrate_pieces(const Fn& f, std::vector<double> points, const Options& opt = {}, double scale = 1.0);

//! Ridders' extrapolated central difference.
double derivative(const Fn& f, double x, double h0);

//! Golden-section maximisation of a unimodal function on [a,b]; returns (x, f(x)).
std::pair<double, double> golden_max(const Fn& f, double a, double b, double tol = 1e-12);

//! Bisection for a sign change of f on [a,b].
double bisect(const Fn& f, double a, double b, double tol = 1e-12);

}  // namespace stein::quad
