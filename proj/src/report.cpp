#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>

#include "stein/distances.hpp"

namespace stein {

namespace {

using json = nlohmann::json;

// JSON has no inf/nan; spell them out
json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double to_num(const json& j) {
  if (j.is_number()) return j.get<double>();
  auto s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::numeric_limits<double>::quiet_NaN();
}

json pairs(const std::vector<std::pair<std::string, double>>& v) {
  json o = json::array();
  for (const auto& [k, x] : v) o.push_back({{"name", k}, {"value", num(x)}});
  return o;
}

std::vector<std::pair<std::string, double>> unpairs(const json& j) {
  std::vector<std::pair<std::string, double>> v;
  for (const auto& e : j) v.emplace_back(e.at("name").get<std::string>(), to_num(e.at("value")));
  return v;
}

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

}  // namespace

std::string to_json(const BoundReport& r, int indent) {
  json traces = json::array();
  for (const auto& t : r.kappa.limit_diagnostics) {
    json pts = json::array();
    for (const auto& [x, l] : t.points) pts.push_back({num(x), num(l)});
    traces.push_back({{"endpoint", num(t.endpoint)}, {"upper", t.upper}, {"value", num(t.value)},
                      {"verdict", t.verdict}, {"trace", pts}});
  }
  json j = {{"metric", to_string(r.metric)},
            {"method", to_string(r.method)},
            {"direction", r.direction},
            {"ell", r.ell},
            {"bound", num(r.bound)},
            {"kappa", {{"kind", to_string(r.kappa.kind)}, {"value", num(r.kappa.value)}, {"diagnostics", traces}}},
            {"oracle", r.oracle ? num(*r.oracle) : json(nullptr)},
            {"dominates", r.dominates_oracle},
            {"details", pairs(r.details)},
            {"params", pairs(r.params)}};
  return j.dump(indent);
}

BoundReport report_from_json(std::string_view text) {
  json j = json::parse(text);
  BoundReport r;
  r.metric = parse_metric(j.at("metric").get<std::string>());
  r.method = parse_method(j.at("method").get<std::string>());
  r.direction = j.at("direction").get<std::string>();
  r.ell = j.at("ell").get<int>();
  r.bound = to_num(j.at("bound"));
  const auto& k = j.at("kappa");
  r.kappa.kind = parse_kappa_kind(k.at("kind").get<std::string>());
  r.kappa.value = to_num(k.at("value"));
  for (const auto& t : k.at("diagnostics")) {
    LimitTrace tr;
    tr.endpoint = to_num(t.at("endpoint"));
    tr.upper = t.at("upper").get<bool>();
    tr.value = to_num(t.at("value"));
    tr.verdict = t.at("verdict").get<std::string>();
    for (const auto& p : t.at("trace")) tr.points.emplace_back(to_num(p.at(0)), to_num(p.at(1)));
    r.kappa.limit_diagnostics.push_back(std::move(tr));
  }
  if (!j.at("oracle").is_null()) r.oracle = to_num(j.at("oracle"));
  r.dominates_oracle = j.at("dominates").get<bool>();
  r.details = unpairs(j.at("details"));
  r.params = unpairs(j.at("params"));
  return r;
}

bool operator==(const BoundReport& a, const BoundReport& b) {
  auto eq_pairs = [](const auto& x, const auto& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i].first != y[i].first || !same(x[i].second, y[i].second)) return false;
    return true;
  };
  if (a.metric != b.metric || a.method != b.method || a.direction != b.direction || a.ell != b.ell) return false;
  if (!same(a.bound, b.bound) || a.kappa.kind != b.kappa.kind || !same(a.kappa.value, b.kappa.value)) return false;
  if (a.oracle.has_value() != b.oracle.has_value() || (a.oracle && !same(*a.oracle, *b.oracle))) return false;
  if (a.dominates_oracle != b.dominates_oracle) return false;
  const auto& ta = a.kappa.limit_diagnostics;
  const auto& tb = b.kappa.limit_diagnostics;
  if (ta.size() != tb.size()) return false;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (!same(ta[i].endpoint, tb[i].endpoint) || ta[i].upper != tb[i].upper || !same(ta[i].value, tb[i].value) ||
        ta[i].verdict != tb[i].verdict || ta[i].points.size() != tb[i].points.size())
      return false;
    for (std::size_t k = 0; k < ta[i].points.size(); ++k)
      if (!same(ta[i].points[k].first, tb[i].points[k].first) || !same(ta[i].points[k].second, tb[i].points[k].second))
        return false;
  }
  return eq_pairs(a.details, b.details) && eq_pairs(a.params, b.params);
}

}  // namespace stein
