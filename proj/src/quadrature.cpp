#include "stein/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace stein::quad {

namespace {

// QUADPACK qk15 nodes and weights
constexpr std::array<double, 8> kXgk = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                       0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  int depth;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const Fn& f, double a, double b, int depth, int& evals) {
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double fc = f(c);
  double resk = fc * kWgk[7];
  double resg = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    double dx = h * kXgk[j];
    double s = f(c - dx) + f(c + dx);
    resk += kWgk[j] * s;
    if (j % 2 == 1) resg += kWg[j / 2] * s;
  }
  evals += 15;
  double err = std::fabs((resk - resg) * h);
  // round-off floor so flat integrands stop splitting
  err = std::max(err, 50.0 * std::numeric_limits<double>::epsilon() * std::fabs(resk * h));
  return {a, b, resk * h, err, depth};
}

Result adapt(const Fn& f, double a, double b, const Options& opt) {
  Result out;
  if (a == b) return out;
  std::priority_queue<Segment> open;
  std::vector<Segment> done;
  auto first = gk15(f, a, b, 0, out.evaluations);
  open.push(first);
  double total = first.value, err = first.error;
  int count = 1;
  while (!open.empty() && err > std::max(opt.abs_tol, opt.rel_tol * std::fabs(total))) {
    if (count >= opt.max_intervals) {
      out.converged = false;
      break;
    }
    Segment s = open.top();
    open.pop();
    if (s.depth >= opt.max_depth) {
      done.push_back(s);
      out.converged = false;
      continue;
    }
    double m = 0.5 * (s.a + s.b);
    auto l = gk15(f, s.a, m, s.depth + 1, out.evaluations);
    auto r = gk15(f, m, s.b, s.depth + 1, out.evaluations);
    total += l.value + r.value - s.value;
    err += l.error + r.error - s.error;
    open.push(l);
    open.push(r);
    ++count;
  }
  // resum to avoid drift from the incremental updates
  total = 0.0;
  err = 0.0;
  for (const auto& s : done) total += s.value, err += s.error;
  while (!open.empty()) {
    total += open.top().value;
    err += open.top().error;
    open.pop();
  }
  out.value = total;
  out.error = err;
  return out;
}

}  // namespace

Result integrate(const Fn& f, double a, double b, const Options& opt, double scale) {
  if (std::isnan(a) || std::isnan(b)) throw std::invalid_argument("integrate: NaN limit");
  if (a > b) {
    auto r = integrate(f, b, a, opt, scale);
    r.value = -r.value;
    return r;
  }
  bool ia = std::isinf(a), ib = std::isinf(b);
  if (!ia && !ib) return adapt(f, a, b, opt);
  if (ia && ib) {
    auto l = integrate(f, a, 0.0, opt, scale);
    auto r = integrate(f, 0.0, b, opt, scale);
    return {l.value + r.value, l.error + r.error, l.converged && r.converged, l.evaluations + r.evaluations};
  }
  // one infinite end: x = x0 +/- scale * t / (1 - t)
  double x0 = ia ? b : a;
  double sgn = ia ? -1.0 : 1.0;
  Fn g = [&](double t) {
    double u = 1.0 - t;
    double x = x0 + sgn * scale * t / u;
    if (!std::isfinite(x)) return 0.0;
    double v = f(x) * scale / (u * u);
    return std::isfinite(v) ? v : 0.0;
  };
  return adapt(g, 0.0, 1.0, opt);
}

Result integrate_pieces(const Fn& f, std::vector<double> points, const Options& opt, double scale) {
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  Result out;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    auto r = integrate(f, points[i], points[i + 1], opt, scale);
    out.value += r.value;
    out.error += r.error;
    out.converged = out.converged && r.converged;
    out.evaluations += r.evaluations;
  }
  return out;
}

double derivative(const Fn& f, double x, double h0) {
  constexpr int kN = 10;
  constexpr double kCon = 1.4, kCon2 = kCon * kCon;
  double a[kN][kN];
  double h = h0;
  a[0][0] = (f(x + h) - f(x - h)) / (2.0 * h);
  double err = std::numeric_limits<double>::max();
  double ans = a[0][0];
  for (int i = 1; i < kN; ++i) {
    h /= kCon;
    a[0][i] = (f(x + h) - f(x - h)) / (2.0 * h);
    double fac = kCon2;
    for (int j = 1; j <= i; ++j) {
      a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
      fac *= kCon2;
      double e = std::max(std::fabs(a[j][i] - a[j - 1][i]), std::fabs(a[j][i] - a[j - 1][i - 1]));
      if (e <= err) {
        err = e;
        ans = a[j][i];
      }
    }
    if (std::fabs(a[i][i] - a[i - 1][i - 1]) >= 2.0 * err) break;
  }
  return ans;
}

std::pair<double, double> golden_max(const Fn& f, double a, double b, double tol) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (std::fabs(b - a) > tol * (1.0 + std::fabs(a) + std::fabs(b))) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return fc > fd ? std::pair{c, fc} : std::pair{d, fd};
}

double bisect(const Fn& f, double a, double b, double tol) {
  double fa = f(a);
  if (fa == 0.0) return a;
  for (int i = 0; i < 400 && b - a > tol * (1.0 + std::fabs(a)); ++i) {
    double m = 0.5 * (a + b);
    double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm > 0) == (fa > 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace stein::quad
