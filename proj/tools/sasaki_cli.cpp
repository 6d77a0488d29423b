// Command-line front end: analyze, verify, catalog.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sasaki.hpp"
#include "sasaki/config.hpp"
#include "sasaki/report.hpp"

namespace {

struct Flags {
    std::string config;
    std::string catalog;
    std::vector<std::string> params;
    std::vector<std::string> grid;
    std::string point;
    std::string routes;
    double tol = 0.0;
    std::string format;
    bool strict = false;
    long long seed = -1;
};

sasaki::JobConfig build_config(const Flags& f) {
    using namespace sasaki;
    JobConfig cfg;
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw ConfigError("cannot open config '" + f.config + "'");
        cfg = parse_config(in);
    }
    if (!f.catalog.empty()) {
        if (cfg.manifold) throw ConfigError("--catalog conflicts with the inline manifold in the config");
        if (!cfg.catalog || cfg.catalog->name != f.catalog) cfg.catalog = CatalogRef{f.catalog, {}};
    }
    for (const auto& kv : f.params) {
        if (!cfg.catalog) throw ConfigError("--param needs a catalog entry");
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--param expects k=v, got '" + kv + "'");
        const std::string key = detail::trim(kv.substr(0, eq));
        cfg.catalog->params[key] = detail::number_value(detail::trim(kv.substr(eq + 1)), {}, detail::ConfigContext(0));
    }
    for (const auto& g : f.grid) {
        const auto eq = g.find('=');
        if (eq == std::string::npos) throw ConfigError("--grid expects AXIS=COUNT, got '" + g + "'");
        cfg.grid_overrides[detail::trim(g.substr(0, eq))] =
            detail::count_value(detail::trim(g.substr(eq + 1)), detail::ConfigContext(0));
        cfg.point.reset();
    }
    if (!f.point.empty()) {
        cfg.point = detail::number_list(f.point, {}, detail::ConfigContext(0));
        cfg.grid.clear();
        cfg.grid_overrides.clear();
    }
    if (!f.routes.empty()) cfg.routes = detail::routes_value(f.routes);
    if (f.tol != 0.0) {
        if (!(f.tol > 0.0)) throw ConfigError("--tol must be positive");
        cfg.tol = f.tol;
    }
    if (!f.format.empty()) cfg.format = detail::format_value(f.format);
    if (f.strict) cfg.strict = true;
    if (f.seed >= 0) cfg.seed = static_cast<std::uint64_t>(f.seed);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mean curvature of unit vector fields in the Sasaki unit tangent bundle"};
    app.require_subcommand(1);
    Flags f;

    auto add_job_flags = [&f](CLI::App* sub) {
        sub->add_option("--config", f.config, "job config file");
        sub->add_option("--catalog", f.catalog, "catalog entry name");
        sub->add_option("--param", f.params, "catalog parameter k=v (repeatable)");
        sub->add_option("--grid", f.grid, "grid count AXIS=COUNT (repeatable)");
        sub->add_option("--point", f.point, "single evaluation point v1,v2,...");
        sub->add_option("--routes", f.routes, "comma list of theorem1, sh, 2d, frenet, foliation");
        sub->add_option("--tol", f.tol, "tolerance for verdicts");
        sub->add_option("--format", f.format, "table, csv or json-lines");
        sub->add_flag("--strict", f.strict, "exit 3 on any evaluation error");
        sub->add_option("--seed", f.seed, "re-seed the singular frame bases");
    };
    CLI::App* analyze = app.add_subcommand("analyze", "evaluate H over a point or grid");
    CLI::App* verify = app.add_subcommand("verify", "compare against a catalog entry's closed form");
    CLI::App* catalog = app.add_subcommand("catalog", "list catalog entries");
    add_job_flags(analyze);
    add_job_flags(verify);
    catalog->add_option("--format", f.format, "table, csv or json-lines");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : sasaki::kExitConfig;
    }

    try {
        if (catalog->parsed()) {
            return sasaki::run_catalog(f.format.empty() ? sasaki::OutputFormat::Table
                                                        : sasaki::detail::format_value(f.format),
                                       std::cout);
        }
        const sasaki::JobConfig cfg = build_config(f);
        if (analyze->parsed()) return sasaki::run_analyze(cfg, std::cout);
        return sasaki::run_verify(cfg, std::cout);
    } catch (const sasaki::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return sasaki::kExitConfig;
    } catch (const sasaki::Error& e) {
        std::cerr << "evaluation error: " << e.what() << '\n';
        return sasaki::kExitEvaluation;
    }
}
