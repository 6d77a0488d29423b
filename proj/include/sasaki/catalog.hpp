#pragma once

// Built-in manifold/field pairs with closed-form expected mean curvature.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "sasaki/errors.hpp"
#include "sasaki/expr.hpp"
#include "sasaki/frame.hpp"
#include "sasaki/manifold.hpp"

namespace sasaki {

struct CatalogParam {
    std::string name;
    double default_value = 0.0;
    std::string description;
};

// Expected values at a point. `pairs` holds (λ_σ, |H_σ|) in the entry's own
// labelling; `spectrum` is the full list of λ_σ.
struct ExpectedValues {
    std::vector<std::pair<double, double>> pairs;
    double magnitude = 0.0;
    std::vector<double> spectrum;
};

using ParamMap = std::map<std::string, double, std::less<>>;

struct CatalogEntry {
    std::string name;
    std::string provenance;
    ParamMap params;
    std::shared_ptr<const ChartMetric> metric;
    UnitField field;
    std::function<ExpectedValues(const Point&)> expected;
};

struct CatalogInfo {
    std::string name;
    std::vector<CatalogParam> params;
    std::string provenance;
};

namespace detail {

inline ExpectedValues from_pairs(std::vector<std::pair<double, double>> pairs) {
    ExpectedValues e;
    double s = 0.0;
    for (const auto& [l, h] : pairs) {
        e.spectrum.push_back(l);
        s += h * h;
    }
    e.magnitude = std::sqrt(s);
    e.pairs = std::move(pairs);
    return e;
}

inline std::vector<std::string> coordinate_names(std::size_t dim) {
    std::vector<std::string> c{"u"};
    if (dim == 2) {
        c.push_back("v");
    } else {
        for (std::size_t i = 1; i < dim; ++i) c.push_back("v" + std::to_string(i));
    }
    return c;
}

inline std::vector<std::vector<std::string>> diagonal_metric(const std::vector<std::string>& diag) {
    const std::size_t n = diag.size();
    std::vector<std::vector<std::string>> m(n, std::vector<std::string>(n, "0"));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = diag[i];
    return m;
}

inline double param(const ParamMap& p, const std::string& name) {
    auto it = p.find(name);
    if (it == p.end()) throw CatalogError("missing parameter '" + name + "'");
    return it->second;
}

inline int integer_param(const ParamMap& p, const std::string& name, int lo, int hi) {
    const double v = param(p, name);
    if (v != std::floor(v) || v < lo || v > hi) {
        throw CatalogError("parameter '" + name + "' must be an integer in [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
    }
    return static_cast<int>(v);
}

inline double theta_param(const ParamMap& p) {
    const double t = param(p, "theta");
    if (t < 0.0 || t > std::numbers::pi / 2) throw CatalogError("parameter 'theta' must lie in [0, pi/2]");
    return t;
}

struct Builder {
    std::string provenance;
    std::vector<CatalogParam> params;
    std::function<CatalogEntry(const ParamMap&)> make;
};

// Horospherical chart of hyperbolic (n+1)-space and the field
// cosθ X_0 + sinθ cos(au) X_1 + sinθ sin(au) X_2, X_α = e^{-u} ∂_{v^α}.
inline CatalogEntry horospherical_field(const std::string& name, int n, double theta, double a) {
    const std::size_t dim = static_cast<std::size_t>(n) + 1;
    SymbolTable st;
    st.coordinates = coordinate_names(dim);
    st.constants = {{"theta", theta}, {"a", a}};
    std::vector<std::string> diag{"1"};
    for (int i = 0; i < n; ++i) diag.push_back("exp(2*u)");
    Box box(dim, Interval{-1.0, 1.0});
    auto metric = std::make_shared<const ChartMetric>(st, box, diagonal_metric(diag));
    std::vector<std::string> comps(dim, "0");
    comps[0] = "cos(theta)";
    comps[1] = "sin(theta)*cos(a*u)*exp(-u)";
    comps[2] = "sin(theta)*sin(a*u)*exp(-u)";
    CatalogEntry e;
    e.name = name;
    e.metric = metric;
    e.field = UnitField(metric, comps);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double nn = n;
    const double w = 1.0 + c * c + a * a * s * s;
    const double h1 = std::sqrt(2.0) * s * c / (nn + 1) * ((1 - a * a) / w + (nn - 2) / (1 + c * c));
    const double h2 = a * nn * s / ((nn + 1) * std::sqrt(w));
    std::vector<std::pair<double, double>> pairs{{1.0, std::abs(h1)}, {std::sqrt(c * c + a * a * s * s), std::abs(h2)}};
    for (int i = 3; i <= n; ++i) pairs.emplace_back(c, 0.0);
    const ExpectedValues ev = from_pairs(pairs);
    e.expected = [ev](const Point&) { return ev; };
    return e;
}

inline const std::map<std::string, Builder, std::less<>>& builders() {
    static const std::map<std::string, Builder, std::less<>> table{
        {"euclidean",
         {"H = 0, lambda = 0",
          {{"n", 2, "fibre dimension; the chart has n+1 coordinates"}},
          [](const ParamMap& p) {
              const int n = integer_param(p, "n", 1, static_cast<int>(kMaxDim) - 1);
              const std::size_t dim = static_cast<std::size_t>(n) + 1;
              SymbolTable st = SymbolTable::with_default_coordinates(dim);
              auto metric = std::make_shared<const ChartMetric>(st, Box(dim, Interval{-1.0, 1.0}),
                                                                diagonal_metric(std::vector<std::string>(dim, "1")));
              std::vector<std::string> comps(dim, "0");
              comps[0] = "1";
              CatalogEntry e{"euclidean", "", p, metric, UnitField(metric, comps), {}};
              const ExpectedValues ev = from_pairs(std::vector<std::pair<double, double>>(dim - 1, {0.0, 0.0}));
              e.expected = [ev](const Point&) { return ev; };
              return e;
          }}},
        {"exp2uv",
         {"|H| = exp(-uv) / (2 (1+v^2)^(3/2))",
          {},
          [](const ParamMap& p) {
              SymbolTable st;
              st.coordinates = {"u", "v"};
              auto metric = std::make_shared<const ChartMetric>(st, Box(2, Interval{-1.0, 1.0}),
                                                                diagonal_metric({"1", "exp(2*u*v)"}));
              CatalogEntry e{"exp2uv", "", p, metric, UnitField(metric, {"1", "0"}), {}};
              e.expected = [](const Point& q) {
                  const double v = q[1];
                  return from_pairs({{std::abs(v), std::exp(-q[0] * v) / (2.0 * std::pow(1.0 + v * v, 1.5))}});
              };
              return e;
          }}},
        {"hyperbolic_radial",
         {"H = 0 (radial field of constant curvature -1)",
          {},
          [](const ParamMap& p) {
              SymbolTable st;
              st.coordinates = {"u", "v"};
              auto metric = std::make_shared<const ChartMetric>(
                  st, Box{{0.2, 3.0}, {-std::numbers::pi, std::numbers::pi}}, diagonal_metric({"1", "sinh(u)^2"}));
              CatalogEntry e{"hyperbolic_radial", "", p, metric, UnitField(metric, {"1", "0"}), {}};
              e.expected = [](const Point& q) { return from_pairs({{1.0 / std::tanh(q[0]), 0.0}}); };
              return e;
          }}},
        {"lob_np1_vf1",
         {"H_1 = (n-2)/(n+1) sqrt2 sin(t) cos(t)/(1+cos^2 t), H_2 = n sqrt2 sin(t)/(2(n+1)), H_s = 0 for s >= 3",
          {{"n", 3, "fibre dimension (n >= 2)"}, {"theta", std::numbers::pi / 4, "angle with du, in [0, pi/2]"}},
          [](const ParamMap& p) {
              auto e = horospherical_field("lob_np1_vf1", integer_param(p, "n", 2, static_cast<int>(kMaxDim) - 1),
                                           theta_param(p), 1.0);
              e.params = p;
              return e;
          }}},
        {"lob_np1_vf2",
         {"H_1 = sqrt2 sin(t) cos(t)/(n+1) ((1-a^2)/(1+cos^2 t+a^2 sin^2 t) + (n-2)/(1+cos^2 t)), "
          "H_2 = a n sin(t)/((n+1) sqrt(1+cos^2 t+a^2 sin^2 t)), H_s = 0 for s >= 3",
          {{"n", 3, "fibre dimension (n >= 2)"},
           {"theta", std::numbers::pi / 4, "angle with du, in [0, pi/2]"},
           {"a", 1, "rotation rate of the field along u"}},
          [](const ParamMap& p) {
              auto e = horospherical_field("lob_np1_vf2", integer_param(p, "n", 2, static_cast<int>(kMaxDim) - 1),
                                           theta_param(p), param(p, "a"));
              e.params = p;
              return e;
          }}},
        {"lobachevsky2",
         {"|H| = a / (2 sqrt(2+a^2))",
          {{"a", 1, "rotation rate of the field angle a*u+b"}, {"b", 0, "angle offset"}},
          [](const ParamMap& p) {
              const double a = param(p, "a");
              SymbolTable st;
              st.coordinates = {"u", "v"};
              st.constants = {{"a", a}, {"b", param(p, "b")}};
              auto metric = std::make_shared<const ChartMetric>(st, Box(2, Interval{-1.0, 1.0}),
                                                                diagonal_metric({"1", "exp(2*u)"}));
              CatalogEntry e{"lobachevsky2", "", p, metric,
                             UnitField(metric, {"cos(a*u+b)", "sin(a*u+b)*exp(-u)"}), {}};
              const ExpectedValues ev = from_pairs({{std::sqrt(1.0 + a * a), std::abs(a) / (2.0 * std::sqrt(2.0 + a * a))}});
              e.expected = [ev](const Point&) { return ev; };
              return e;
          }}},
        {"sphere3_hopf",
         {"H = 0 (geodesic and strongly normal)",
          {},
          [](const ParamMap& p) {
              SymbolTable st;
              st.coordinates = {"eta", "x1", "x2"};
              auto metric = std::make_shared<const ChartMetric>(
                  st, Box{{0.1, std::numbers::pi / 2 - 0.1}, {0.0, 2 * std::numbers::pi}, {0.0, 2 * std::numbers::pi}},
                  diagonal_metric({"1", "cos(eta)^2", "sin(eta)^2"}));
              CatalogEntry e{"sphere3_hopf", "", p, metric, UnitField(metric, {"0", "1", "1"}), {}};
              const ExpectedValues ev = from_pairs({{1.0, 0.0}, {1.0, 0.0}});
              e.expected = [ev](const Point&) { return ev; };
              return e;
          }}},
        {"warped2",
         {"|H| = exp(-2g) w'' / (2 (1+(exp(-g) w' + g')^2)^(3/2))",
          {{"g", 0, "warping profile: 0 = u, 1 = u^2/2, 2 = log cosh u"},
           {"omega", 0, "angle profile: 0 = const, 1 = v, 2 = v^2/2"},
           {"c", 0, "constant angle for omega = const"}},
          [](const ParamMap& p) {
              const int gi = integer_param(p, "g", 0, 2);
              const int wi = integer_param(p, "omega", 0, 2);
              const double c = param(p, "c");
              static const char* g2[] = {"exp(2*u)", "exp(u^2)", "cosh(u)^2"};
              static const char* ginv[] = {"exp(-u)", "exp(-u^2/2)", "1/cosh(u)"};
              static const char* om[] = {"c", "v", "v^2/2"};
              SymbolTable st;
              st.coordinates = {"u", "v"};
              st.constants = {{"c", c}};
              auto metric = std::make_shared<const ChartMetric>(st, Box{{0.2, 1.5}, {0.0, 1.0}},
                                                                diagonal_metric({"1", g2[gi]}));
              const std::string w = std::string("(") + om[wi] + ")";
              CatalogEntry e{"warped2", "", p, metric,
                             UnitField(metric, {"cos" + w, "sin" + w + "*" + ginv[gi]}), {}};
              e.expected = [gi, wi](const Point& q) {
                  const double u = q[0];
                  const double v = q[1];
                  const double g = gi == 0 ? u : gi == 1 ? 0.5 * u * u : std::log(std::cosh(u));
                  const double dg = gi == 0 ? 1.0 : gi == 1 ? u : std::tanh(u);
                  const double wv = wi == 0 ? 0.0 : wi == 1 ? 1.0 : v;
                  const double wvv = wi == 2 ? 1.0 : 0.0;
                  const double lambda = std::exp(-g) * wv + dg;
                  const double h = std::exp(-2 * g) * wvv / (2.0 * std::pow(1.0 + lambda * lambda, 1.5));
                  return from_pairs({{std::abs(lambda), std::abs(h)}});
              };
              return e;
          }}},
    };
    return table;
}

}  // namespace detail

// Entries sorted by name.
inline std::vector<CatalogInfo> catalog_listing() {
    std::vector<CatalogInfo> out;
    for (const auto& [name, b] : detail::builders()) out.push_back({name, b.params, b.provenance});
    return out;
}

// Builds an entry; missing parameters take their defaults, unknown ones are
// rejected.
inline CatalogEntry instantiate(std::string_view name, const ParamMap& params = {}) {
    const auto& table = detail::builders();
    auto it = table.find(name);
    if (it == table.end()) throw CatalogError("unknown catalog entry '" + std::string(name) + "'");
    ParamMap full;
    for (const auto& prm : it->second.params) full[prm.name] = prm.default_value;
    for (const auto& [k, v] : params) {
        if (!full.contains(k)) throw CatalogError("entry '" + std::string(name) + "' has no parameter '" + k + "'");
        full[k] = v;
    }
    CatalogEntry e = it->second.make(full);
    e.params = full;
    e.provenance = it->second.provenance;
    return e;
}

}  // namespace sasaki
