#include <string>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "sltrace/config.hpp"

using namespace sltrace;

namespace {

const std::string kBase = "problem: {a: 0, b: 1, c1: 0.3, c2: 0.7, delta: 2, gamma: 3, h: 0}\n";

std::string error_of(const std::string& text) {
    try {
        parse_config(text, "cfg.yaml");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(Config, MinimalDefaults) {
    const auto c = parse_config(kBase);
    EXPECT_EQ(c.problem.delta, 2.0);
    EXPECT_EQ(c.side_convention, SideConvention::left);
    EXPECT_EQ(c.trace.n_terms, 2000);
    EXPECT_EQ(c.trace.convention, TraceConvention::theorem);
    EXPECT_FALSE(c.trace.assert_tol.has_value());
    EXPECT_EQ(c.solver.shooting.rel_tol, ShootingOptions{}.rel_tol);
    EXPECT_TRUE(validate_problem(c.problem).is_global());
}

TEST(Config, FullDocument) {
    const auto c = parse_config(kBase + R"(potential:
  mode: polynomial
  pieces: [[1], [2, 1], [0, 0, 3]]
  side_convention: mean
solver: {rel_tol: 1e-10, abs_tol: 1e-11, scan_refinement_max: 6, lambda_min_override: -50}
trace: {n_terms: 500, convention: series31, assert_tol: 0.01}
)");
    const auto p = validate_problem(c.problem);
    EXPECT_FALSE(p.is_global());
    EXPECT_DOUBLE_EQ(q_eval(p, 0.5, Side::left), 2.5);
    EXPECT_EQ(c.side_convention, SideConvention::mean);
    EXPECT_EQ(c.solver.shooting.rel_tol, 1e-10);
    EXPECT_EQ(c.solver.scan_refinement_max, 6);
    EXPECT_EQ(*c.solver.lambda_min_override, -50.0);
    EXPECT_EQ(c.trace.n_terms, 500);
    EXPECT_EQ(c.trace.convention, TraceConvention::series31);
    EXPECT_EQ(*c.trace.assert_tol, 0.01);
}

TEST(Config, ReferenceConfigsLoad) {
    for (const char* name : {"p0_qzero.yaml", "p0_qone.yaml", "p0_qlinear.yaml"}) {
        const auto c = load_config(fixtures::config_path(name));
        EXPECT_EQ(c.problem.c1, 0.3) << name;
        EXPECT_NO_THROW(validate_problem(c.problem)) << name;
    }
}

TEST(Config, CallableTable) {
    std::string t = kBase + "potential:\n  mode: callable-table\n  tables:\n";
    t += "    - [0, 0.075, 0.15, 0.225, 0.3]\n";
    t += "    - [0.3, 0.4, 0.5, 0.6, 0.7]\n";
    t += "    - [0.7, 0.775, 0.85, 0.925, 1.0]\n";
    const auto c = parse_config(t);
    const auto p = validate_problem(c.problem);
    EXPECT_FALSE(p.is_polynomial());
    EXPECT_NEAR(q_eval(p, 0.55, Side::left), 0.55, 1e-12);
    EXPECT_NEAR(q_eval(p, 0.3, Side::right), 0.3, 1e-15);
    const auto Q = compute_Q(p);
    EXPECT_NEAR(Q.Q2, 0.2, 1e-10);
}

TEST(Config, ErrorsNameLineAndField) {
    auto e = error_of(kBase + "solver:\n  rel_tol: abc\n");
    EXPECT_NE(e.find("cfg.yaml:3:"), std::string::npos) << e;
    EXPECT_NE(e.find("solver.rel_tol"), std::string::npos) << e;

    e = error_of(kBase + "trace:\n  n_terms: 10\n");
    EXPECT_NE(e.find("trace.n_terms"), std::string::npos) << e;

    e = error_of(kBase + "potential:\n  colour: red\n");
    EXPECT_NE(e.find("potential.colour: unknown key"), std::string::npos) << e;

    e = error_of("problem: {a: 0, b: 1, c1: 0.3, c2: 0.7, delta: 2, h: 0}\n");
    EXPECT_NE(e.find("problem.gamma: missing required field"), std::string::npos) << e;

    e = error_of("problem: {a: 0, b: 1, c1: 0.8, c2: 0.7, delta: 2, gamma: 3, h: 0}\n");
    EXPECT_NE(e.find("cfg.yaml:1:"), std::string::npos) << e;
    EXPECT_NE(e.find("c1 < c2"), std::string::npos) << e;

    e = error_of(kBase + "potential:\n  mode: table\n");
    EXPECT_NE(e.find("potential.mode"), std::string::npos) << e;

    e = error_of(kBase + "potential:\n  mode: callable-table\n  tables: [[1, 2, 3, 4, 5], [1, 2], [1, 2, 3, 4, 5]]\n");
    EXPECT_NE(e.find("potential.tables[1]"), std::string::npos) << e;

    e = error_of("problem: [1, 2\n");
    EXPECT_NE(e.find("cfg.yaml:"), std::string::npos) << e;

    EXPECT_FALSE(error_of(kBase + "problem2: {}\n").empty());
    EXPECT_FALSE(error_of(kBase + "solver: {scan_refinement_max: 20}\n").empty());
    EXPECT_FALSE(error_of(kBase + "solver: {rel_tol: -1}\n").empty());
    EXPECT_FALSE(error_of(kBase + "potential: {global: [1], pieces: [[1], [1], [1]]}\n").empty());
    EXPECT_FALSE(error_of("problem: {a: 0, b: 1, c1: 0.3, c2: 0.7, delta: 0, gamma: 3, h: 0}\n").empty());
}

TEST(Config, MissingFile) {
    EXPECT_THROW(load_config("/nonexistent/run.yaml"), ConfigError);
}
