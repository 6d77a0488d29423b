#pragma once

// Job configuration: a sectioned key = value text format.
//
//   # comment
//   [catalog]            name = <entry>, any other key is an entry parameter
//   [constants]          <name> = <number expression>
//   [manifold]           coordinates = u, v
//                        domain.<coord> = lo, hi
//                        g.<coord>.<coord> = <expression>   (unset entries are 0,
//                                                           lower triangle mirrors upper)
//   [field]              xi.<coord> = <expression>
//   [evaluation]         point = x1, x2, ...     or    grid = n1, n2, ...
//                        routes = theorem1, sh, 2d, frenet, foliation
//                        tol = <number>, strict = true|false, seed = <integer>
//   [output]             format = table | csv | json-lines
//
// Number fields accept constant expressions such as pi/2.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sasaki/catalog.hpp"
#include "sasaki/errors.hpp"
#include "sasaki/expr.hpp"
#include "sasaki/manifold.hpp"

namespace sasaki {

enum class OutputFormat { Table, Csv, JsonLines };

inline const std::vector<std::string>& known_routes() {
    static const std::vector<std::string> r{"theorem1", "sh", "2d", "frenet", "foliation"};
    return r;
}

struct CatalogRef {
    std::string name;
    ParamMap params;
};

struct InlineManifold {
    SymbolTable symbols;
    Box domain;
    std::vector<std::vector<std::string>> metric;
    std::vector<std::string> field;
};

struct JobConfig {
    std::optional<CatalogRef> catalog;
    std::optional<InlineManifold> manifold;
    std::optional<Point> point;
    std::vector<std::size_t> grid;  // per-axis counts; empty means the default
    std::map<std::string, std::size_t, std::less<>> grid_overrides;
    std::vector<std::string> routes{"theorem1"};
    std::optional<double> tol;
    bool strict = false;
    std::uint64_t seed = 0;
    OutputFormat format = OutputFormat::Table;
};

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

class ConfigContext {
public:
    explicit ConfigContext(int line) : line_(line) {}
    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("line " + std::to_string(line_) + ": " + what);
    }
    int line() const { return line_; }

private:
    int line_;
};

inline double number_value(const std::string& text, const SymbolTable& constants, const ConfigContext& ctx) {
    try {
        SymbolTable st;
        st.constants = constants.constants;
        return Expr::parse(text, st).eval(std::span<const double>{});
    } catch (const Error& e) {
        ctx.fail("bad number '" + text + "': " + e.what());
    }
}

inline std::vector<double> number_list(const std::string& text, const SymbolTable& constants,
                                       const ConfigContext& ctx) {
    std::vector<double> out;
    for (const auto& part : split(text, ',')) {
        if (part.empty()) ctx.fail("empty item in list '" + text + "'");
        out.push_back(number_value(part, constants, ctx));
    }
    return out;
}

inline std::size_t count_value(const std::string& text, const ConfigContext& ctx) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(text, &pos);
    } catch (const std::exception&) {
        ctx.fail("bad count '" + text + "'");
    }
    if (pos != text.size() || v < 1) ctx.fail("grid counts must be integers >= 1, got '" + text + "'");
    return static_cast<std::size_t>(v);
}

inline std::uint64_t seed_value(const std::string& text, const ConfigContext& ctx) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) ctx.fail("bad seed '" + text + "'");
    return v;
}

inline OutputFormat format_value(const std::string& text) {
    if (text == "table") return OutputFormat::Table;
    if (text == "csv") return OutputFormat::Csv;
    if (text == "json-lines") return OutputFormat::JsonLines;
    throw ConfigError("unknown output format '" + text + "'");
}

inline std::vector<std::string> routes_value(const std::string& text) {
    std::vector<std::string> out;
    for (const auto& r : split(text, ',')) {
        if (std::find(known_routes().begin(), known_routes().end(), r) == known_routes().end()) {
            throw ConfigError("unknown route '" + r + "'");
        }
        if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
    }
    if (out.empty()) throw ConfigError("no routes requested");
    return out;
}

inline bool bool_value(const std::string& text, const ConfigContext& ctx) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    ctx.fail("bad boolean '" + text + "'");
}

}  // namespace detail

inline JobConfig parse_config(std::istream& in) {
    using detail::ConfigContext;
    JobConfig cfg;
    SymbolTable constants;
    std::string section;
    std::string line;
    int lineno = 0;

    struct RawManifold {
        std::vector<std::string> coordinates;
        int coordinates_line = 0;
        std::map<std::string, std::pair<std::string, int>> domain;
        std::map<std::pair<std::string, std::string>, std::pair<std::string, int>> metric;
        std::map<std::string, std::pair<std::string, int>> field;
    } raw;
    bool have_manifold = false;
    std::optional<CatalogRef> catalog;
    std::optional<std::pair<std::string, int>> point_text;
    std::optional<std::pair<std::string, int>> grid_text;
    std::vector<std::pair<std::string, std::pair<std::string, int>>> catalog_params;

    while (std::getline(in, line)) {
        ++lineno;
        const ConfigContext ctx(lineno);
        const auto hash = line.find('#');
        const std::string body = detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']') ctx.fail("unterminated section header");
            section = detail::trim(std::string_view(body).substr(1, body.size() - 2));
            static const std::vector<std::string> sections{"catalog",  "constants",  "manifold",
                                                            "field",    "evaluation", "output"};
            if (std::find(sections.begin(), sections.end(), section) == sections.end()) {
                ctx.fail("unknown section [" + section + "]");
            }
            if (section == "manifold" || section == "field") have_manifold = true;
            if (section == "catalog" && !catalog) catalog = CatalogRef{};
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) ctx.fail("expected key = value");
        const std::string key = detail::trim(std::string_view(body).substr(0, eq));
        const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) ctx.fail("empty key");
        if (section.empty()) ctx.fail("key '" + key + "' outside any section");

        try {
            if (section == "catalog") {
                if (key == "name") {
                    catalog->name = value;
                } else {
                    catalog_params.push_back({key, {value, lineno}});
                }
            } else if (section == "constants") {
                constants.constants[key] = detail::number_value(value, constants, ctx);
            } else if (section == "manifold") {
                if (key == "coordinates") {
                    raw.coordinates = detail::split(value, ',');
                    raw.coordinates_line = lineno;
                } else if (key.rfind("domain.", 0) == 0) {
                    raw.domain[key.substr(7)] = {value, lineno};
                } else if (key.rfind("g.", 0) == 0) {
                    const auto parts = detail::split(key.substr(2), '.');
                    if (parts.size() != 2) ctx.fail("metric key must be g.<coord>.<coord>");
                    raw.metric[{parts[0], parts[1]}] = {value, lineno};
                } else {
                    ctx.fail("unknown manifold key '" + key + "'");
                }
            } else if (section == "field") {
                if (key.rfind("xi.", 0) != 0) ctx.fail("field keys must be xi.<coord>");
                raw.field[key.substr(3)] = {value, lineno};
            } else if (section == "evaluation") {
                if (key == "point") {
                    point_text = {{value, lineno}};
                } else if (key == "grid") {
                    grid_text = {{value, lineno}};
                } else if (key == "routes") {
                    cfg.routes = detail::routes_value(value);
                } else if (key == "tol") {
                    cfg.tol = detail::number_value(value, constants, ctx);
                    if (!(*cfg.tol > 0.0)) ctx.fail("tol must be positive");
                } else if (key == "strict") {
                    cfg.strict = detail::bool_value(value, ctx);
                } else if (key == "seed") {
                    cfg.seed = detail::seed_value(value, ctx);
                } else {
                    ctx.fail("unknown evaluation key '" + key + "'");
                }
            } else if (section == "output") {
                if (key == "format") {
                    cfg.format = detail::format_value(value);
                } else {
                    ctx.fail("unknown output key '" + key + "'");
                }
            }
        } catch (const ConfigError& e) {
            const std::string what = e.what();
            if (what.rfind("line ", 0) == 0) throw;
            ctx.fail(what);
        }
    }

    if (catalog && have_manifold) throw ConfigError("config has both [catalog] and an inline manifold");
    if (catalog) {
        if (catalog->name.empty()) throw ConfigError("[catalog] needs a name");
        for (const auto& [k, v] : catalog_params) {
            catalog->params[k] = detail::number_value(v.first, constants, ConfigContext(v.second));
        }
        cfg.catalog = catalog;
    } else if (have_manifold) {
        const ConfigContext at_coords(raw.coordinates_line);
        if (raw.coordinates.empty()) throw ConfigError("[manifold] needs coordinates");
        InlineManifold m;
        m.symbols.coordinates = raw.coordinates;
        m.symbols.constants = constants.constants;
        const std::size_t n = raw.coordinates.size();
        auto index_of = [&](const std::string& name, int l) {
            auto it = std::find(raw.coordinates.begin(), raw.coordinates.end(), name);
            if (it == raw.coordinates.end()) ConfigContext(l).fail("unknown coordinate '" + name + "'");
            return static_cast<std::size_t>(it - raw.coordinates.begin());
        };
        m.domain.resize(n);
        std::vector<bool> seen(n, false);
        for (const auto& [c, v] : raw.domain) {
            const ConfigContext ctx(v.second);
            const std::size_t i = index_of(c, v.second);
            const auto lh = detail::number_list(v.first, constants, ctx);
            if (lh.size() != 2 || !(lh[0] < lh[1])) ctx.fail("domain must be 'lo, hi' with lo < hi");
            m.domain[i] = {lh[0], lh[1]};
            seen[i] = true;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!seen[i]) at_coords.fail("missing domain for coordinate '" + raw.coordinates[i] + "'");
        }
        auto check_expr = [&](const std::pair<std::string, int>& v) {
            try {
                Expr::parse(v.first, m.symbols);
            } catch (const Error& e) {
                ConfigContext(v.second).fail(e.what());
            }
        };
        m.metric.assign(n, std::vector<std::string>(n));
        for (const auto& [ij, v] : raw.metric) {
            check_expr(v);
            m.metric[index_of(ij.first, v.second)][index_of(ij.second, v.second)] = v.first;
        }
        m.field.assign(n, "0");
        for (const auto& [c, v] : raw.field) {
            check_expr(v);
            m.field[index_of(c, v.second)] = v.first;
        }
        if (raw.field.empty()) throw ConfigError("[field] needs at least one component");
        cfg.manifold = std::move(m);
    }
    if (point_text && grid_text) {
        throw ConfigError("line " + std::to_string(grid_text->second) + ": both point and grid given");
    }
    if (point_text) {
        cfg.point = detail::number_list(point_text->first, constants, ConfigContext(point_text->second));
    }
    if (grid_text) {
        for (const auto& c : detail::split(grid_text->first, ',')) {
            cfg.grid.push_back(detail::count_value(c, ConfigContext(grid_text->second)));
        }
    }
    return cfg;
}

inline JobConfig parse_config_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

}  // namespace sasaki
