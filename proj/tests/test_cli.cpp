#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sasaki/config.hpp"
#include "sasaki/report.hpp"

using namespace sasaki;

namespace {

std::string sample_path(const std::string& name) { return std::string(SASAKI_SOURCE_DIR) + "/samples/" + name; }

JobConfig load(const std::string& name) {
    std::ifstream in(sample_path(name));
    return parse_config(in);
}

std::string config_error(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

JobConfig catalog_job(const std::string& name, ParamMap params = {}) {
    JobConfig cfg;
    cfg.catalog = CatalogRef{name, std::move(params)};
    return cfg;
}

std::vector<std::vector<std::string>> parse_csv_block(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line) && !line.empty()) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST(Config, SamplesParse) {
    for (const char* f : {"lobachevsky2.cfg", "exp2uv.cfg", "lob_vf1.cfg", "inline_warped.cfg"}) {
        EXPECT_NO_THROW(load(f)) << f;
    }
    const auto cfg = load("inline_warped.cfg");
    ASSERT_TRUE(cfg.manifold.has_value());
    EXPECT_FALSE(cfg.catalog.has_value());
    EXPECT_EQ(cfg.grid, (std::vector<std::size_t>{3, 3}));
    EXPECT_EQ(cfg.routes, (std::vector<std::string>{"theorem1", "2d", "frenet", "sh"}));
}

TEST(Config, ErrorsCarryLineNumbers) {
    try {
        load("broken.cfg");
        FAIL() << "expected a config error";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 6"), std::string::npos) << e.what();
    }
    EXPECT_NE(config_error("[catalog]\nname = exp2uv\n[evaluation]\ngrid = 0, 3\n").find("line 4"), std::string::npos);
    EXPECT_NE(config_error("[catalog]\nname = exp2uv\n[evaluation]\ntol = -1\n").find("line 4"), std::string::npos);
    EXPECT_NE(config_error("[catalog]\nname = exp2uv\n[evaluation]\nroutes = theorem1, magic\n").find("line 4"),
              std::string::npos);
    EXPECT_NE(config_error("[nonsense]\n").find("line 1"), std::string::npos);
    EXPECT_NE(config_error("[catalog]\nname = exp2uv\nbogus\n").find("line 3"), std::string::npos);
    EXPECT_NE(config_error("[manifold]\ncoordinates = u\ndomain.u = 0, 1\ng.u.u = 1\n[field]\nxi.u = zz\n").find("line 6"),
              std::string::npos);
}

TEST(Config, ExactlyOneManifoldSource) {
    EXPECT_THROW(resolve_job(parse_config_text("[evaluation]\ngrid = 3, 3\n")), ConfigError);
    EXPECT_FALSE(config_error("[catalog]\nname = exp2uv\n[manifold]\ncoordinates = u\ndomain.u = 0, 1\ng.u.u = 1\n"
                              "[field]\nxi.u = 1\n")
                     .empty());
}

TEST(Config, ConstantsInNumbers) {
    const auto cfg = parse_config_text("[constants]\nt = pi/6\n[catalog]\nname = lob_np1_vf1\ntheta = t\n");
    EXPECT_NEAR(cfg.catalog->params.at("theta"), std::numbers::pi / 6, 1e-16);
}

TEST(Analyze, Examples) {
    auto lob = catalog_job("lobachevsky2", {{"a", 1.0}});
    lob.format = OutputFormat::JsonLines;
    std::ostringstream out;
    EXPECT_EQ(run_analyze(lob, out), kExitOk);
    const std::string last = out.str().substr(out.str().rfind("{\"type\":\"summary\""));
    const auto summary = nlohmann::json::parse(last);
    EXPECT_EQ(summary["count"], 25);
    EXPECT_TRUE(summary["constant"].get<bool>());
    EXPECT_NEAR(summary["max_abs"].get<double>(), 0.2886751345948129, 1e-12);

    auto eu = catalog_job("euclidean");
    eu.format = OutputFormat::JsonLines;
    std::ostringstream eo;
    run_analyze(eu, eo);
    EXPECT_NE(eo.str().find("\"minimal\":true"), std::string::npos);

    auto ex = catalog_job("exp2uv");
    ex.point = Point{0.0, 0.0};
    ex.format = OutputFormat::JsonLines;
    std::ostringstream xo;
    run_analyze(ex, xo);
    EXPECT_NE(xo.str().find("\"abs\":0.5"), std::string::npos) << xo.str();
    EXPECT_NE(xo.str().find("\"minimal\":false"), std::string::npos);
}

TEST(Analyze, CsvRoundTripsExactly) {
    auto cfg = catalog_job("lob_np1_vf2", {{"n", 2}, {"theta", 0.7}, {"a", 1.7}});
    cfg.grid = {3, 2, 2};
    cfg.format = OutputFormat::Csv;
    std::ostringstream out;
    ASSERT_EQ(run_analyze(cfg, out), kExitOk);
    const auto rows = parse_csv_block(out.str());
    ASSERT_EQ(rows.size(), 13u);
    const auto& header = rows[0];
    const auto col = [&](const std::string& name) {
        return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
    };
    const auto entry = instantiate("lob_np1_vf2", cfg.catalog->params);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        Point p;
        for (std::size_t k = 0; k < 3; ++k) p.push_back(std::strtod(rows[r][k].c_str(), nullptr));
        const auto h = mean_curvature_at(entry.field, p);
        EXPECT_EQ(std::strtod(rows[r][col("theorem1.abs")].c_str(), nullptr), h.magnitude);
        EXPECT_EQ(std::strtod(rows[r][col("theorem1.H_1")].c_str(), nullptr), h.components[0]);
        EXPECT_EQ(std::strtod(rows[r][col("theorem1.H_2")].c_str(), nullptr), h.components[1]);
        EXPECT_EQ(std::strtod(rows[r][col("lambda_2")].c_str(), nullptr), h.lambda[1]);
    }
}

TEST(Analyze, PerPointErrorsAndStrictMode) {
    auto cfg = catalog_job("exp2uv");
    cfg.grid = {1, 3};
    cfg.routes = {"theorem1", "sh"};
    std::ostringstream out;
    EXPECT_EQ(run_analyze(cfg, out), kExitOk);
    EXPECT_NE(out.str().find("sh: singular values too close"), std::string::npos) << out.str();
    cfg.strict = true;
    std::ostringstream strict_out;
    EXPECT_EQ(run_analyze(cfg, strict_out), kExitEvaluation);
}

TEST(Analyze, InlineManifoldMatchesCatalog) {
    auto cfg = load("inline_warped.cfg");
    cfg.format = OutputFormat::Csv;
    cfg.routes = {"theorem1"};
    std::ostringstream out;
    ASSERT_EQ(run_analyze(cfg, out), kExitOk);
    const auto rows = parse_csv_block(out.str());
    ASSERT_EQ(rows.size(), 10u);
    ASSERT_EQ(rows[0][4], "theorem1.abs");
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const double u = std::strtod(rows[r][0].c_str(), nullptr);
        const double v = std::strtod(rows[r][1].c_str(), nullptr);
        const double gp = std::tanh(u);
        const double eg = 1 / std::cosh(u);
        const double w1 = v;
        const double expected = eg * eg / (2 * std::pow(1 + (eg * w1 + gp) * (eg * w1 + gp), 1.5));
        EXPECT_NEAR(std::strtod(rows[r][4].c_str(), nullptr), expected, 1e-12);
    }
}

TEST(Verify, ExitCodes) {
    std::ostringstream sink;
    EXPECT_EQ(run_verify(catalog_job("lob_np1_vf1", {{"n", 3}, {"theta", std::numbers::pi / 6}}), sink), kExitOk);
    auto ex = catalog_job("exp2uv");
    ex.grid = {7, 7};
    EXPECT_EQ(run_verify(ex, sink), kExitOk);
    auto tight = catalog_job("hyperbolic_radial");
    tight.tol = 1e-15;
    std::ostringstream out;
    EXPECT_EQ(run_verify(tight, out), kExitVerifyFail);
    EXPECT_NE(out.str().find("FAIL"), std::string::npos);
    JobConfig inline_cfg = load("inline_warped.cfg");
    EXPECT_THROW(run_verify(inline_cfg, sink), ConfigError);
    EXPECT_THROW(run_analyze(catalog_job("torus"), sink), ConfigError);
}

TEST(Verify, ReportsMaximumDeviationPerComponent) {
    auto cfg = catalog_job("lob_np1_vf1", {{"n", 3}, {"theta", std::numbers::pi / 6}});
    cfg.format = OutputFormat::JsonLines;
    std::ostringstream out;
    ASSERT_EQ(run_verify(cfg, out), kExitOk);
    const std::string text = out.str();
    const auto summary = nlohmann::json::parse(text.substr(text.rfind("{\"type\":\"summary\"")));
    ASSERT_EQ(summary["max_dev_H"].size(), 3u);
    for (const auto& d : summary["max_dev_H"]) EXPECT_LT(d.get<double>(), 1e-7);
    EXPECT_EQ(summary["verdict"], "PASS");
}

TEST(Catalog, ListingOutput) {
    std::ostringstream out;
    EXPECT_EQ(run_catalog(OutputFormat::Csv, out), kExitOk);
    const auto rows = parse_csv_block(out.str());
    ASSERT_EQ(rows.size(), 9u);
    EXPECT_EQ(rows[6][0], "lobachevsky2");
    EXPECT_NE(out.str().find("a / (2 sqrt(2+a^2))"), std::string::npos);
}

TEST(Determinism, IdenticalOutputForIdenticalInput) {
    for (const char* f : {"lobachevsky2.cfg", "exp2uv.cfg", "lob_vf1.cfg", "inline_warped.cfg"}) {
        for (auto fmt : {OutputFormat::Table, OutputFormat::Csv, OutputFormat::JsonLines}) {
            auto cfg = load(f);
            cfg.format = fmt;
            cfg.seed = 12;
            std::ostringstream a;
            std::ostringstream b;
            run_analyze(cfg, a);
            run_analyze(cfg, b);
            EXPECT_EQ(a.str(), b.str()) << f;
        }
    }
}
