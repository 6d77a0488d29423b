#pragma once

// analyze / verify / catalog drivers behind the command-line tool.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "sasaki/catalog.hpp"
#include "sasaki/config.hpp"
#include "sasaki/errors.hpp"
#include "sasaki/frame.hpp"
#include "sasaki/manifold.hpp"
#include "sasaki/mean_curvature.hpp"

namespace sasaki {

enum ExitCode : int { kExitOk = 0, kExitVerifyFail = 1, kExitConfig = 2, kExitEvaluation = 3 };

struct Job {
    std::string label;
    std::vector<std::string> coordinates;
    std::shared_ptr<const ChartMetric> metric;
    UnitField field;
    std::optional<CatalogEntry> entry;
};

// Builds the manifold and field named by the config. Definition errors
// (unknown entry, bad expression, non-unit field) surface as ConfigError.
inline Job resolve_job(const JobConfig& cfg) {
    Job job;
    try {
        if (cfg.catalog) {
            job.entry = instantiate(cfg.catalog->name, cfg.catalog->params);
            job.metric = job.entry->metric;
            job.field = job.entry->field;
            job.label = job.entry->name;
            for (const auto& [k, v] : job.entry->params) job.label += " " + k + "=" + format_double(v);
        } else if (cfg.manifold) {
            const auto& m = *cfg.manifold;
            job.metric = std::make_shared<const ChartMetric>(m.symbols, m.domain, m.metric);
            job.field = UnitField(job.metric, m.field);
            job.label = "inline";
        } else {
            throw ConfigError("config needs either [catalog] or an inline [manifold] with [field]");
        }
        validate_metric(*job.metric, 20, 1);
        job.field.validate(20, 1, 1e-9);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    job.coordinates = job.metric->symbols().coordinates;
    return job;
}

// Evaluation points: the configured point, or a grid over the domain that
// includes the interval end points, row-major with the first axis slowest.
inline std::vector<Point> evaluation_points(const JobConfig& cfg, const Job& job) {
    const std::size_t dim = job.metric->dim();
    if (cfg.point) {
        if (cfg.point->size() != dim) {
            throw ConfigError("point has " + std::to_string(cfg.point->size()) + " coordinates, chart has " +
                              std::to_string(dim));
        }
        if (!job.metric->contains(*cfg.point)) throw ConfigError("point lies outside the chart domain");
        return {*cfg.point};
    }
    std::vector<std::size_t> counts(dim, 5);
    if (!cfg.grid.empty()) {
        if (cfg.grid.size() != dim) throw ConfigError("grid needs one count per coordinate");
        counts = cfg.grid;
    }
    for (const auto& [axis, c] : cfg.grid_overrides) {
        auto it = std::find(job.coordinates.begin(), job.coordinates.end(), axis);
        if (it == job.coordinates.end()) throw ConfigError("unknown grid axis '" + axis + "'");
        if (c < 1) throw ConfigError("grid counts must be >= 1");
        counts[static_cast<std::size_t>(it - job.coordinates.begin())] = c;
    }
    const Box& box = job.metric->domain();
    std::vector<Point> out;
    std::vector<std::size_t> idx(dim, 0);
    while (true) {
        Point p(dim);
        for (std::size_t k = 0; k < dim; ++k) {
            const auto& iv = box[k];
            p[k] = counts[k] == 1 ? 0.5 * (iv.lo + iv.hi)
                                  : iv.lo + (iv.hi - iv.lo) * static_cast<double>(idx[k]) /
                                                static_cast<double>(counts[k] - 1);
        }
        out.push_back(std::move(p));
        std::size_t k = dim;
        while (k > 0) {
            --k;
            if (++idx[k] < counts[k]) break;
            idx[k] = 0;
            if (k == 0) return out;
        }
    }
}

struct RouteValue {
    std::vector<double> components;
    double magnitude = 0.0;
    std::string error;
};

struct PointReport {
    Point point;
    std::vector<double> lambda;
    bool degenerate = false;
    double volume_density = 0.0;
    std::map<std::string, RouteValue, std::less<>> routes;
    std::string error;  // failure of the shared frame evaluation

    bool failed() const {
        if (!error.empty()) return true;
        for (const auto& [_, r] : routes)
            if (!r.error.empty()) return true;
        return false;
    }
};

inline bool is_scalar_route(const std::string& r) { return r == "2d" || r == "frenet"; }

inline PointReport evaluate_point(const Job& job, const Point& p, const std::vector<std::string>& routes,
                                  std::uint64_t seed) {
    PointReport rep;
    rep.point = p;
    FrameOptions opt;
    opt.reseed = seed;
    MeanCurvature primary;
    try {
        const LocalGeometry lg = local_geometry(job.field, p);
        const SingularFrame fr = singular_frame_at(nabla_xi_from(lg), opt);
        rep.lambda = fr.lambda;
        rep.degenerate = fr.degenerate;
        rep.volume_density = volume_density_from(fr);
        primary = mean_curvature_from(lg, fr, r_tensor_from(lg));
    } catch (const Error& e) {
        rep.error = e.what();
        return rep;
    }
    for (const auto& r : routes) {
        RouteValue v;
        try {
            if (r == "theorem1") {
                v.components = primary.components;
                v.magnitude = primary.magnitude;
            } else if (r == "sh") {
                const auto h = mean_curvature_sh_at(job.field, p, 0.0, opt);
                v.components = h.components;
                v.magnitude = h.magnitude;
            } else if (r == "2d") {
                v.components = {mean_curvature_2d_at(job.field, p)};
                v.magnitude = std::abs(v.components[0]);
            } else if (r == "frenet") {
                v.components = {mean_curvature_frenet_at(job.field, p)};
                v.magnitude = std::abs(v.components[0]);
            } else if (r == "foliation") {
                v.components = foliation_mean_curvature_at(job.field, p);
                double s = 0.0;
                for (double x : v.components) s += x * x;
                v.magnitude = std::sqrt(s);
            }
        } catch (const Error& e) {
            v.components.clear();
            v.error = e.what();
        }
        rep.routes[r] = std::move(v);
    }
    return rep;
}

struct RouteSummary {
    std::string route;
    std::size_t count = 0;
    double min_abs = 0.0;
    double max_abs = 0.0;
    double stddev_abs = 0.0;
    bool constant = false;
    bool minimal = false;
};

inline RouteSummary summarize(const std::string& route, const std::vector<PointReport>& pts, double tol) {
    RouteSummary s;
    s.route = route;
    std::vector<double> vals;
    for (const auto& p : pts) {
        auto it = p.routes.find(route);
        if (p.error.empty() && it != p.routes.end() && it->second.error.empty()) vals.push_back(it->second.magnitude);
    }
    s.count = vals.size();
    if (vals.empty()) return s;
    s.min_abs = *std::min_element(vals.begin(), vals.end());
    s.max_abs = *std::max_element(vals.begin(), vals.end());
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    s.stddev_abs = std::sqrt(var / static_cast<double>(vals.size()));
    s.constant = s.stddev_abs < tol;
    s.minimal = s.max_abs < tol;
    return s;
}

namespace detail {

using Row = std::vector<std::string>;

inline std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline void write_rows(std::ostream& os, const Row& header, const std::vector<Row>& rows, OutputFormat fmt) {
    if (fmt == OutputFormat::Csv) {
        auto csv_line = [&](const Row& r) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_cell(r[i]);
            os << '\n';
        };
        csv_line(header);
        for (const auto& r : rows) csv_line(r);
        return;
    }
    std::vector<std::size_t> width(header.size(), 0);
    for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
    for (const auto& r : rows)
        for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) width[i] = std::max(width[i], r[i].size());
    auto line = [&](const Row& r) {
        std::string s;
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) s += "  ";
            s += r[i];
            if (i + 1 < r.size()) s.append(width[i] - r[i].size(), ' ');
        }
        s.erase(s.find_last_not_of(' ') + 1);
        os << s << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
}

inline std::string yes_no(bool b) { return b ? "true" : "false"; }

}  // namespace detail

// Per-point table plus per-route summary. Returns the exit code.
inline int run_analyze(const JobConfig& cfg, std::ostream& os) {
    const Job job = resolve_job(cfg);
    const auto points = evaluation_points(cfg, job);
    const double tol = cfg.tol.value_or(1e-7);
    const std::size_t n = job.metric->dim() - 1;

    std::vector<PointReport> reports;
    for (const auto& p : points) reports.push_back(evaluate_point(job, p, cfg.routes, cfg.seed));
    bool any_failed = false;
    for (const auto& r : reports) any_failed = any_failed || r.failed();

    std::vector<RouteSummary> summaries;
    for (const auto& r : cfg.routes) summaries.push_back(summarize(r, reports, tol));

    if (cfg.format == OutputFormat::JsonLines) {
        nlohmann::ordered_json head;
        head["type"] = "job";
        head["verb"] = "analyze";
        head["label"] = job.label;
        head["points"] = points.size();
        head["routes"] = cfg.routes;
        os << head.dump() << '\n';
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const auto& r = reports[i];
            nlohmann::ordered_json j;
            j["type"] = "point";
            j["index"] = i;
            nlohmann::ordered_json coords;
            for (std::size_t k = 0; k < r.point.size(); ++k) coords[job.coordinates[k]] = r.point[k];
            j["point"] = coords;
            j["lambda"] = r.lambda;
            nlohmann::ordered_json routes = nlohmann::ordered_json::object();
            for (const auto& name : cfg.routes) {
                auto it = r.routes.find(name);
                nlohmann::ordered_json rv;
                if (it == r.routes.end() || !it->second.error.empty()) {
                    rv["error"] = it == r.routes.end() ? r.error : it->second.error;
                } else {
                    rv["H"] = it->second.components;
                    rv["abs"] = it->second.magnitude;
                }
                routes[name] = rv;
            }
            j["routes"] = routes;
            if (r.error.empty()) {
                j["volume_density"] = r.volume_density;
                j["degenerate"] = r.degenerate;
            } else {
                j["error"] = r.error;
            }
            os << j.dump() << '\n';
        }
        for (const auto& s : summaries) {
            nlohmann::ordered_json j;
            j["type"] = "summary";
            j["route"] = s.route;
            j["count"] = s.count;
            j["min_abs"] = s.min_abs;
            j["max_abs"] = s.max_abs;
            j["stddev_abs"] = s.stddev_abs;
            j["tol"] = tol;
            j["constant"] = s.constant;
            j["minimal"] = s.minimal;
            os << j.dump() << '\n';
        }
    } else {
        detail::Row header = job.coordinates;
        for (std::size_t s = 1; s <= n; ++s) header.push_back("lambda_" + std::to_string(s));
        for (const auto& name : cfg.routes) {
            if (is_scalar_route(name)) {
                header.push_back(name + ".H");
            } else {
                for (std::size_t s = 1; s <= n; ++s) header.push_back(name + ".H_" + std::to_string(s));
            }
            header.push_back(name + ".abs");
        }
        header.insert(header.end(), {"volume_density", "degenerate", "error"});
        std::vector<detail::Row> rows;
        for (const auto& r : reports) {
            detail::Row row;
            for (double x : r.point) row.push_back(format_double(x));
            for (std::size_t s = 0; s < n; ++s) row.push_back(s < r.lambda.size() ? format_double(r.lambda[s]) : "");
            std::string errors = r.error;
            for (const auto& name : cfg.routes) {
                const std::size_t width = is_scalar_route(name) ? 1 : n;
                auto it = r.routes.find(name);
                const bool ok = it != r.routes.end() && it->second.error.empty();
                for (std::size_t s = 0; s < width; ++s) row.push_back(ok ? format_double(it->second.components[s]) : "");
                row.push_back(ok ? format_double(it->second.magnitude) : "");
                if (it != r.routes.end() && !it->second.error.empty()) {
                    errors += (errors.empty() ? "" : "; ") + name + ": " + it->second.error;
                }
            }
            row.push_back(r.error.empty() ? format_double(r.volume_density) : "");
            row.push_back(r.error.empty() ? detail::yes_no(r.degenerate) : "");
            row.push_back(errors);
            rows.push_back(std::move(row));
        }
        if (cfg.format == OutputFormat::Table) os << "analyze " << job.label << "\n\n";
        detail::write_rows(os, header, rows, cfg.format);
        os << '\n';
        std::vector<detail::Row> srows;
        for (const auto& s : summaries) {
            srows.push_back({s.route, std::to_string(s.count), format_double(s.min_abs), format_double(s.max_abs),
                             format_double(s.stddev_abs), format_double(tol), detail::yes_no(s.constant),
                             detail::yes_no(s.minimal)});
        }
        detail::write_rows(os, {"route", "count", "min_abs", "max_abs", "stddev_abs", "tol", "constant", "minimal"},
                           srows, cfg.format);
    }
    return cfg.strict && any_failed ? kExitEvaluation : kExitOk;
}

// Matches computed components to expected (λ, |H|) pairs: both sides are
// ordered by λ descending, expected pairs stably.
inline std::vector<std::pair<double, double>> expected_in_frame_order(const ExpectedValues& ev) {
    auto pairs = ev.pairs;
    std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    return pairs;
}

struct VerifyPoint {
    Point point;
    std::vector<double> dev_h;       // ||H_σ| − expected|
    std::vector<double> dev_lambda;  // |λ_σ − expected|
    double dev_abs = 0.0;
    std::vector<double> abs_h;
    std::vector<double> lambda;
    double magnitude = 0.0;
    double expected_magnitude = 0.0;
    std::string error;
};

inline VerifyPoint verify_point(const Job& job, const Point& p, std::uint64_t seed) {
    VerifyPoint v;
    v.point = p;
    try {
        FrameOptions opt;
        opt.reseed = seed;
        const MeanCurvature h = mean_curvature_at(job.field, p, opt);
        const auto ev = job.entry->expected(p);
        const auto exp = expected_in_frame_order(ev);
        if (exp.size() != h.components.size()) throw ConsistencyError("expected value count does not match n");
        for (std::size_t s = 0; s < exp.size(); ++s) {
            v.abs_h.push_back(std::abs(h.components[s]));
            v.lambda.push_back(h.lambda[s]);
            v.dev_h.push_back(std::abs(std::abs(h.components[s]) - exp[s].second));
            v.dev_lambda.push_back(std::abs(h.lambda[s] - exp[s].first));
        }
        v.magnitude = h.magnitude;
        v.expected_magnitude = ev.magnitude;
        v.dev_abs = std::abs(h.magnitude - ev.magnitude);
    } catch (const Error& e) {
        v.error = e.what();
    }
    return v;
}

// Compares computed values with the entry's closed forms. PASS when every
// deviation is within tol and no point failed.
inline int run_verify(const JobConfig& cfg, std::ostream& os) {
    if (!cfg.catalog) throw ConfigError("verify needs a catalog entry");
    const Job job = resolve_job(cfg);
    const auto points = evaluation_points(cfg, job);
    const double tol = cfg.tol.value_or(1e-7);
    const std::size_t n = job.metric->dim() - 1;

    std::vector<VerifyPoint> results;
    for (const auto& p : points) results.push_back(verify_point(job, p, cfg.seed));
    std::vector<double> max_h(n, 0.0);
    std::vector<double> max_l(n, 0.0);
    double max_abs = 0.0;
    std::size_t failures = 0;
    for (const auto& r : results) {
        if (!r.error.empty()) {
            ++failures;
            continue;
        }
        for (std::size_t s = 0; s < n; ++s) {
            max_h[s] = std::max(max_h[s], r.dev_h[s]);
            max_l[s] = std::max(max_l[s], r.dev_lambda[s]);
        }
        max_abs = std::max(max_abs, r.dev_abs);
    }
    bool pass = failures == 0 && max_abs <= tol;
    for (std::size_t s = 0; s < n; ++s) pass = pass && max_h[s] <= tol && max_l[s] <= tol;

    if (cfg.format == OutputFormat::JsonLines) {
        nlohmann::ordered_json head;
        head["type"] = "job";
        head["verb"] = "verify";
        head["label"] = job.label;
        head["points"] = points.size();
        os << head.dump() << '\n';
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& r = results[i];
            nlohmann::ordered_json j;
            j["type"] = "point";
            j["index"] = i;
            nlohmann::ordered_json coords;
            for (std::size_t k = 0; k < r.point.size(); ++k) coords[job.coordinates[k]] = r.point[k];
            j["point"] = coords;
            if (r.error.empty()) {
                j["lambda"] = r.lambda;
                j["abs_H"] = r.abs_h;
                j["abs"] = r.magnitude;
                j["expected_abs"] = r.expected_magnitude;
                j["dev_H"] = r.dev_h;
                j["dev_lambda"] = r.dev_lambda;
                j["dev_abs"] = r.dev_abs;
            } else {
                j["error"] = r.error;
            }
            os << j.dump() << '\n';
        }
        nlohmann::ordered_json s;
        s["type"] = "summary";
        s["max_dev_H"] = max_h;
        s["max_dev_lambda"] = max_l;
        s["max_dev_abs"] = max_abs;
        s["failed_points"] = failures;
        s["tol"] = tol;
        s["verdict"] = pass ? "PASS" : "FAIL";
        os << s.dump() << '\n';
    } else {
        detail::Row header = job.coordinates;
        for (std::size_t s = 1; s <= n; ++s) {
            header.push_back("lambda_" + std::to_string(s));
            header.push_back("abs_H_" + std::to_string(s));
            header.push_back("dev_H_" + std::to_string(s));
        }
        header.insert(header.end(), {"abs", "expected_abs", "dev_abs", "error"});
        std::vector<detail::Row> rows;
        for (const auto& r : results) {
            detail::Row row;
            for (double x : r.point) row.push_back(format_double(x));
            for (std::size_t s = 0; s < n; ++s) {
                const bool ok = r.error.empty();
                row.push_back(ok ? format_double(r.lambda[s]) : "");
                row.push_back(ok ? format_double(r.abs_h[s]) : "");
                row.push_back(ok ? format_double(r.dev_h[s]) : "");
            }
            const bool ok = r.error.empty();
            row.push_back(ok ? format_double(r.magnitude) : "");
            row.push_back(ok ? format_double(r.expected_magnitude) : "");
            row.push_back(ok ? format_double(r.dev_abs) : "");
            row.push_back(r.error);
            rows.push_back(std::move(row));
        }
        if (cfg.format == OutputFormat::Table) os << "verify " << job.label << "\n\n";
        detail::write_rows(os, header, rows, cfg.format);
        os << '\n';
        std::vector<detail::Row> srows;
        for (std::size_t s = 0; s < n; ++s) {
            srows.push_back({"H_" + std::to_string(s + 1), format_double(max_h[s])});
            srows.push_back({"lambda_" + std::to_string(s + 1), format_double(max_l[s])});
        }
        srows.push_back({"abs", format_double(max_abs)});
        srows.push_back({"failed_points", std::to_string(failures)});
        srows.push_back({"tol", format_double(tol)});
        srows.push_back({"verdict", pass ? "PASS" : "FAIL"});
        detail::write_rows(os, {"quantity", "max_deviation"}, srows, cfg.format);
    }
    if (cfg.strict && failures > 0) return kExitEvaluation;
    return pass ? kExitOk : kExitVerifyFail;
}

inline int run_catalog(OutputFormat fmt, std::ostream& os) {
    const auto listing = catalog_listing();
    if (fmt == OutputFormat::JsonLines) {
        for (const auto& e : listing) {
            nlohmann::ordered_json j;
            j["name"] = e.name;
            nlohmann::ordered_json params = nlohmann::ordered_json::array();
            for (const auto& p : e.params) {
                nlohmann::ordered_json pj;
                pj["name"] = p.name;
                pj["default"] = p.default_value;
                pj["description"] = p.description;
                params.push_back(pj);
            }
            j["params"] = params;
            j["expected"] = e.provenance;
            os << j.dump() << '\n';
        }
        return kExitOk;
    }
    std::vector<detail::Row> rows;
    for (const auto& e : listing) {
        std::string params;
        for (const auto& p : e.params) params += (params.empty() ? "" : " ") + p.name + "=" + format_double(p.default_value);
        rows.push_back({e.name, params, e.provenance});
    }
    detail::write_rows(os, {"name", "params", "expected"}, rows, fmt);
    return kExitOk;
}

}  // namespace sasaki
