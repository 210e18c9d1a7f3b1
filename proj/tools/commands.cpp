#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "stein/distances.hpp"
#include "stein/factors.hpp"
#include "stein/oracles.hpp"

namespace stein::cli {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void csv_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
  out << '\n';
}

TestFunction parse_h(const std::string& s) {
  auto colon = s.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("--h expects kind:value, got '" + s + "'");
  std::string kind = s.substr(0, colon);
  double xi = std::stod(s.substr(colon + 1));
  if (kind == "halfline") return TestFunction::half_line(xi);
  if (kind == "pointmass") return TestFunction::point_mass(xi);
  throw std::invalid_argument("unknown test function '" + kind + "' (halfline, pointmass)");
}

BoundReport run_bound(const Distribution& a, const Distribution& t, const std::string& metric,
                      const std::string& method, std::optional<int> ell, const BoundOptions& opt) {
  return bound(make_problem(a, t, parse_metric(metric), parse_method(method), ell), opt);
}

std::vector<double> parse_range(const std::string& r) {
  std::vector<double> parts;
  std::stringstream ss(r);
  std::string tok;
  while (std::getline(ss, tok, ':')) parts.push_back(std::stod(tok));
  if (parts.size() < 2 || parts.size() > 3) throw std::invalid_argument("--range expects lo:hi[:step]");
  double step = parts.size() == 3 ? parts[2] : 1.0;
  if (!(step > 0) || parts[1] < parts[0]) throw std::invalid_argument("--range: empty or bad step");
  std::vector<double> out;
  for (int i = 0;; ++i) {
    double v = parts[0] + i * step;
    if (v > parts[1] + 1e-9 * step) break;
    out.push_back(v);
  }
  return out;
}

// printed competitor curves, keyed by the pair's families
std::vector<std::pair<std::string, double>> competitors(const Distribution& a, const Distribution& t) {
  std::vector<std::pair<std::string, double>> c;
  if (a.family() == Family::StudentT && t.family() == Family::Normal) {
    c.emplace_back("two_over_n", 2.0 / a.params()[0]);
  } else if (a.family() == Family::Binomial && t.family() == Family::Poisson) {
    double n = a.params()[0], lam = t.params()[0];
    c.emplace_back("chen", lam * (1 - std::exp(-lam)) / n);
    c.emplace_back("min_bound", std::min(lam / n, 1 - std::sqrt(std::max(0.0, 1 - std::ceil(lam) / n))));
  }
  return c;
}

// ------------------------------------------------------------------ verify

struct Check {
  std::string name;
  bool pass;
  double value, limit;
};

void identities_suite(std::uint64_t seed, std::vector<Check>& out) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  const std::pair<const char*, const char*> pairs[] = {
      {"student(10)", "normal(0,1)"}, {"beta(2,3)", "gamma(2,5)"},   {"gamma(2,5)", "beta(2,3)"},
      {"exponential(1)", "gamma(2,2)"}, {"rayleighn(50)", "rayleigh()"}, {"binomial(30,0.05)", "poisson(1.5)"},
      {"poisson(1.2)", "poisson(1)"}};
  for (auto [as, ts] : pairs) {
    auto a = Distribution::parse(as), t = Distribution::parse(ts);
    auto h = TestFunction::half_line(t.quantile(u(rng)));
    double want = h.mean(a) - h.mean(t);
    for (auto m : {Method::ScoreDiff, Method::KernelDiff}) {
      auto p = make_problem(a, t, Metric::TV, m);
      auto d = m == Method::ScoreDiff ? diff_expectation_score(p, h) : diff_expectation_kernel(p, h);
      double err = std::fabs(d.value - want);
      out.push_back({"comparison " + p.direction() + " " + to_string(m) + " " + h.label(), err <= 1e-7, err, 1e-7});
    }
  }
  for (const char* s : {"normal(0,1)", "gamma(3,2)", "beta(2,3)", "poisson(3)", "binomial(20,0.3)"}) {
    auto d = Distribution::parse(s);
    int ell = d.is_lattice() ? 1 : 0;
    // smooth g: the residual differentiates numerically
    double z = d.quantile(u(rng));
    auto r = identity_residual(SteinContext::kernel(d, ell), [z](double x) { return std::atan(x - z); });
    out.push_back({std::string("stein identity ") + s, std::fabs(r.value) <= 1e-8, std::fabs(r.value), 1e-8});
  }
}

void factors_suite(std::uint64_t seed, std::vector<Check>& out) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  for (const char* s : {"normal(0,1)", "exponential(2)", "gamma(3,2)", "beta(2,3)", "student(5)", "poisson(10)",
                        "binomial(20,0.3)", "negbinomial(2.5,0.4)"}) {
    auto d = Distribution::parse(s);
    int ell = d.is_lattice() ? 1 : 0;
    auto h = TestFunction::half_line(d.quantile(u(rng)));
    for (auto ctx : {SteinContext::one(d, ell), SteinContext::kernel(d, ell)}) {
      auto sol = solve(ctx, h);
      FactorOptions fo;
      fo.uniform = false;
      double worst = -1e300;
      for (const auto& b : factor_bounds(ctx, h, fo)) {
        if (!b.applicable) continue;
        for (double x : evaluation_grid(d, 80)) {
          if (!d.in_support(x)) continue;
          double v = std::fabs(bounds_g(b.kind) ? sol.g(x) : sol.dg(x));
          worst = std::max(worst, v - b(x));
        }
      }
      out.push_back({std::string("dominance ") + s + " " + ctx.label() + " " + h.label(), worst <= 1e-9, worst, 1e-9});
    }
  }
}

void distances_suite(std::vector<Check>& out) {
  const std::tuple<const char*, const char*, Metric> cases[] = {
      {"student(40)", "normal(0,1)", Metric::Kolmogorov}, {"student(40)", "normal(0,1)", Metric::Wasserstein},
      {"beta(2,3)", "gamma(2,5)", Metric::TV},            {"gamma(2,5)", "beta(2,3)", Metric::TV},
      {"binomial(40,0.025)", "poisson(1)", Metric::TV},   {"rayleighn(100)", "rayleigh()", Metric::Kolmogorov},
      {"poisson(1.3)", "poisson(1)", Metric::TV}};
  for (auto [as, ts, m] : cases)
    for (auto me : {Method::ScoreDiff, Method::KernelDiff}) {
      auto p = make_problem(Distribution::parse(as), Distribution::parse(ts), m, me);
      auto r = bound(p);
      out.push_back({"dominates " + p.direction() + " " + to_string(m) + " " + to_string(me), r.dominates_oracle,
                     r.bound, r.oracle.value_or(NAN)});
    }
  for (auto [as, ts, m] : {std::tuple{"paretomax(10,2.5)", "frechet(2.5)", Metric::Kolmogorov},
                           std::tuple{"stdbinomial(100,0.3)", "normal(0,1)", Metric::Wasserstein}}) {
    auto p = make_problem(Distribution::parse(as), Distribution::parse(ts), m, Method::CrossMeasure);
    auto r = bound(p);
    out.push_back({"dominates " + p.direction() + " cross", r.dominates_oracle, r.bound, r.oracle.value_or(NAN)});
  }
}

}  // namespace

std::string instantiate(const std::string& tmpl, double p) {
  static const std::regex ph(R"(\{(?:([0-9.eE+-]+)/)?p(?:([+-][0-9.eE]+))?\})");
  std::string out;
  auto it = std::sregex_iterator(tmpl.begin(), tmpl.end(), ph);
  std::size_t last = 0;
  for (; it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    out += tmpl.substr(last, m.position() - last);
    double v = m[1].matched ? std::stod(m[1].str()) / p : p;
    if (m[2].matched) v += std::stod(m[2].str());
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
    last = m.position() + m.length();
  }
  return out + tmpl.substr(last);
}

int cmd_bound(const BoundArgs& a, std::ostream& out) {
  auto approx = Distribution::parse(a.approx), target = Distribution::parse(a.target);
  BoundOptions opt;
  opt.oracle = a.oracle;
  opt.z_grid = a.z_grid;
  auto fwd = run_bound(approx, target, a.metric, a.method, a.ell, opt);
  if (!a.both_directions) {
    out << to_json(fwd) << '\n';
    return kOk;
  }
  auto bwd = run_bound(target, approx, a.metric, a.method, a.ell, opt);
  out << "[\n" << to_json(fwd) << ",\n" << to_json(bwd) << "\n]\n";
  return kOk;
}

int cmd_factors(const FactorArgs& a, std::ostream& out) {
  auto d = Distribution::parse(a.target);
  int ell = a.ell.value_or(d.is_lattice() ? 1 : 0);
  SteinContext ctx = a.c == "kernel" ? SteinContext::kernel(d, ell)
                     : a.c == "one"  ? SteinContext::one(d, ell)
                                     : throw std::invalid_argument("--c must be one or kernel");
  auto h = parse_h(a.h);
  auto sol = solve(ctx, h);
  FactorOptions fo;
  fo.uniform = false;
  std::vector<FactorBound> bs;
  for (auto& b : factor_bounds(ctx, h, fo))
    if (b.applicable) bs.push_back(std::move(b));
  std::vector<std::string> head{"x", "g", "dg"};
  for (const auto& b : bs) head.push_back(b.name);
  csv_row(out, head);
  for (double x : evaluation_grid(d, a.grid)) {
    if (!d.in_support(x)) continue;
    std::vector<std::string> row{num(x), num(sol.g(x)), num(sol.dg(x))};
    for (const auto& b : bs) row.push_back(num(b(x)));
    csv_row(out, row);
  }
  return kOk;
}

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  if (instantiate(a.approx, 1.0) == a.approx && instantiate(a.target, 1.0) == a.target)
    throw std::invalid_argument("sweep templates need a {p} placeholder");
  auto ps = parse_range(a.range);
  struct Row {
    double bound = 0, oracle = NAN, kappa = 0;
    std::vector<std::pair<std::string, double>> comp;
  };
  std::vector<Row> rows(ps.size());
  std::vector<double> idx(ps.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = double(i);
  BoundOptions opt;
  opt.oracle = a.oracle;
  opt.exec = par::Exec::Serial;  // the sweep itself is the parallel loop
  // rows land at their own index, so output order never depends on completion order
  par::map(idx, [&](double di) {
    auto i = static_cast<std::size_t>(di);
    auto ap = Distribution::parse(instantiate(a.approx, ps[i]));
    auto tg = Distribution::parse(instantiate(a.target, ps[i]));
    auto r = run_bound(ap, tg, a.metric, a.method, a.ell, opt);
    rows[i] = {r.bound, r.oracle.value_or(NAN), r.kappa.value, competitors(ap, tg)};
    return 0.0;
  });
  std::vector<std::string> head{"param", "approx", "target", "bound", "kappa", "oracle"};
  for (auto& [k, v] : rows.front().comp) head.push_back(k);
  csv_row(out, head);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    std::vector<std::string> row{num(ps[i]), "\"" + instantiate(a.approx, ps[i]) + "\"",
                                 "\"" + instantiate(a.target, ps[i]) + "\"", num(rows[i].bound),
                                 num(rows[i].kappa), num(rows[i].oracle)};
    for (auto& [k, v] : rows[i].comp) row.push_back(num(v));
    csv_row(out, row);
  }
  return kOk;
}

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  const std::vector<std::string> known{"identities", "factors", "distances", "all"};
  if (std::find(known.begin(), known.end(), a.suite) == known.end())
    throw std::invalid_argument("unknown suite '" + a.suite + "'");
  std::vector<Check> checks;
  bool all = a.suite == "all";
  if (all || a.suite == "identities") identities_suite(a.seed, checks);
  if (all || a.suite == "factors") factors_suite(a.seed, checks);
  if (all || a.suite == "distances") distances_suite(checks);
  nlohmann::json j;
  j["suite"] = a.suite;
  j["seed"] = a.seed;
  std::size_t failed = 0;
  for (const auto& c : checks) {
    failed += !c.pass;
    auto num_or_str = [](double v) -> nlohmann::json { return std::isfinite(v) ? nlohmann::json(v) : "nan"; };
    j["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"value", num_or_str(c.value)},
                           {"limit", num_or_str(c.limit)}});
  }
  j["total"] = checks.size();
  j["failed"] = failed;
  j["pass"] = failed == 0;
  out << j.dump(2) << '\n';
  return failed == 0 ? kOk : kVerifyFailed;
}

}  // namespace stein::cli
