#pragma once

// Run configuration: a YAML document with sections problem, potential,
// solver and trace. Unknown keys are rejected; every diagnostic carries the
// source line and the dotted field name.
//
//   problem:   {a, b, c1, c2, delta, gamma, h}          all required
//   potential: mode: polynomial | callable-table         default polynomial
//              global: [c0, c1, ...]                     one polynomial on [a, b]
//              pieces: [[...], [...], [...]]             or one per subinterval
//              tables: [[...], [...], [...]]             callable-table samples,
//                                                        equispaced on each closed
//                                                        subinterval (>= 5 each)
//              side_convention: left | right | mean      default left
//   solver:    rel_tol, abs_tol, scan_refinement_max, lambda_min_override
//   trace:     n_terms (default 2000), convention (theorem | series31),
//              assert_tol

#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <yaml-cpp/yaml.h>

#include "sltrace/errors.hpp"
#include "sltrace/problem.hpp"
#include "sltrace/spectrum.hpp"
#include "sltrace/trace.hpp"

namespace sltrace {

struct TraceSettings {
    long n_terms = 2000;
    TraceConvention convention = TraceConvention::theorem;
    std::optional<double> assert_tol;
};

struct RunConfig {
    ProblemSpec problem;
    SideConvention side_convention = SideConvention::left;
    SpectrumOptions solver;
    TraceSettings trace;
    std::string source;
};

namespace detail {

class ConfigReader {
public:
    explicit ConfigReader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Node& at, const std::string& field, const std::string& msg) const {
        std::ostringstream os;
        os << source_;
        if (at.IsDefined() && at.Mark().line >= 0) os << ':' << at.Mark().line + 1 << ':' << at.Mark().column + 1;
        os << ": " << (field.empty() ? "" : field + ": ") << msg;
        throw ConfigError(os.str());
    }

    void check_keys(const YAML::Node& section, const std::string& name, const std::set<std::string>& allowed) const {
        if (!section.IsMap()) fail(section, name, "expected a mapping");
        for (const auto& kv : section) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.count(key)) fail(kv.first, name.empty() ? key : name + "." + key, "unknown key");
        }
    }

    double real(const YAML::Node& n, const std::string& field) const {
        if (!n.IsScalar()) fail(n, field, "expected a number");
        const auto text = n.Scalar();
        try {
            std::size_t used = 0;
            const double v = std::stod(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            return v;
        } catch (const std::exception&) {
            fail(n, field, "'" + text + "' is not a number");
        }
    }

    long integer(const YAML::Node& n, const std::string& field) const {
        if (!n.IsScalar()) fail(n, field, "expected an integer");
        const auto text = n.Scalar();
        try {
            std::size_t used = 0;
            const long v = std::stol(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            return v;
        } catch (const std::exception&) {
            fail(n, field, "'" + text + "' is not an integer");
        }
    }

    std::string word(const YAML::Node& n, const std::string& field) const {
        if (!n.IsScalar()) fail(n, field, "expected a string");
        return n.Scalar();
    }

    std::vector<double> reals(const YAML::Node& n, const std::string& field) const {
        if (!n.IsSequence()) fail(n, field, "expected a list of numbers");
        std::vector<double> v;
        for (std::size_t i = 0; i < n.size(); ++i) v.push_back(real(n[i], field + "[" + std::to_string(i) + "]"));
        return v;
    }

    double required_real(const YAML::Node& section, const std::string& sec, const std::string& key) const {
        const auto n = section[key];
        if (!n) fail(section, sec + "." + key, "missing required field");
        return real(n, sec + "." + key);
    }

private:
    std::string source_;
};

/// Equispaced samples on [lo, hi] interpolated by a cubic B-spline.
inline std::function<double(double)> table_function(std::vector<double> samples, double lo, double hi) {
    const double step = (hi - lo) / static_cast<double>(samples.size() - 1);
    auto spline = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
        samples.data(), samples.size(), lo, step);
    return [spline, lo, hi](double x) { return (*spline)(std::clamp(x, lo, hi)); };
}

} // namespace detail

inline RunConfig parse_config(const std::string& text, const std::string& source = "<config>") {
    detail::ConfigReader rd(source);
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                          ": " + e.msg);
    }
    if (!root.IsMap()) throw ConfigError(source + ": expected a mapping with sections problem, potential, solver, trace");
    rd.check_keys(root, "", {"problem", "potential", "solver", "trace"});

    RunConfig cfg;
    cfg.source = source;

    const auto prob = root["problem"];
    if (!prob) throw ConfigError(source + ": problem: missing required section");
    rd.check_keys(prob, "problem", {"a", "b", "c1", "c2", "delta", "gamma", "h"});
    auto& ps = cfg.problem;
    ps.a = rd.required_real(prob, "problem", "a");
    ps.b = rd.required_real(prob, "problem", "b");
    ps.c1 = rd.required_real(prob, "problem", "c1");
    ps.c2 = rd.required_real(prob, "problem", "c2");
    ps.delta = rd.required_real(prob, "problem", "delta");
    ps.gamma = rd.required_real(prob, "problem", "gamma");
    ps.h = rd.required_real(prob, "problem", "h");

    ps.potential = PotentialSpec::constant(0.0);
    if (const auto pot = root["potential"]) {
        rd.check_keys(pot, "potential", {"mode", "global", "pieces", "tables", "side_convention"});
        const std::string mode = pot["mode"] ? rd.word(pot["mode"], "potential.mode") : "polynomial";
        if (const auto sc = pot["side_convention"]) {
            const auto v = rd.word(sc, "potential.side_convention");
            if (v == "left") cfg.side_convention = SideConvention::left;
            else if (v == "right") cfg.side_convention = SideConvention::right;
            else if (v == "mean") cfg.side_convention = SideConvention::mean;
            else rd.fail(sc, "potential.side_convention", "expected left, right or mean, got '" + v + "'");
        }
        if (mode == "polynomial") {
            if (pot["tables"]) rd.fail(pot["tables"], "potential.tables", "only valid with mode callable-table");
            if (pot["global"] && pot["pieces"]) rd.fail(pot["pieces"], "potential.pieces", "give either global or pieces");
            if (const auto g = pot["global"]) {
                ps.potential = PotentialSpec::global(rd.reals(g, "potential.global"));
            } else if (const auto pcs = pot["pieces"]) {
                if (!pcs.IsSequence() || pcs.size() != 3) rd.fail(pcs, "potential.pieces", "expected 3 coefficient lists");
                std::vector<std::vector<double>> c;
                for (std::size_t k = 0; k < 3; ++k)
                    c.push_back(rd.reals(pcs[k], "potential.pieces[" + std::to_string(k) + "]"));
                ps.potential = PotentialSpec::piecewise(std::move(c));
            }
        } else if (mode == "callable-table") {
            const auto tb = pot["tables"];
            if (!tb) rd.fail(pot, "potential.tables", "missing required field for mode callable-table");
            if (pot["global"] || pot["pieces"])
                rd.fail(pot, "potential", "global/pieces are not used with mode callable-table");
            if (!tb.IsSequence() || tb.size() != 3) rd.fail(tb, "potential.tables", "expected 3 sample lists");
            const double bounds[4] = {ps.a, ps.c1, ps.c2, ps.b};
            CallablePotential cp;
            for (std::size_t k = 0; k < 3; ++k) {
                const std::string field = "potential.tables[" + std::to_string(k) + "]";
                auto v = rd.reals(tb[k], field);
                if (v.size() < 5) rd.fail(tb[k], field, "needs at least 5 samples");
                if (!(bounds[k] < bounds[k + 1])) rd.fail(prob, "problem", "require a < c1 < c2 < b");
                if (k == 0) {
                    cp.limits.c1_left = v.back();
                } else if (k == 1) {
                    cp.limits.c1_right = v.front();
                    cp.limits.c2_left = v.back();
                } else {
                    cp.limits.c2_right = v.front();
                }
                cp.pieces[k] = detail::table_function(std::move(v), bounds[k], bounds[k + 1]);
            }
            ps.potential = PotentialSpec::from_callable(std::move(cp));
        } else {
            rd.fail(pot["mode"], "potential.mode", "expected polynomial or callable-table, got '" + mode + "'");
        }
    }

    if (const auto sol = root["solver"]) {
        rd.check_keys(sol, "solver", {"rel_tol", "abs_tol", "scan_refinement_max", "lambda_min_override"});
        auto& so = cfg.solver;
        if (sol["rel_tol"]) so.shooting.rel_tol = rd.real(sol["rel_tol"], "solver.rel_tol");
        if (sol["abs_tol"]) so.shooting.abs_tol = rd.real(sol["abs_tol"], "solver.abs_tol");
        if (!(so.shooting.rel_tol > 0.0)) rd.fail(sol["rel_tol"], "solver.rel_tol", "must be positive");
        if (!(so.shooting.abs_tol > 0.0)) rd.fail(sol["abs_tol"], "solver.abs_tol", "must be positive");
        if (const auto n = sol["scan_refinement_max"]) {
            const long v = rd.integer(n, "solver.scan_refinement_max");
            if (v < 0 || v > 12) rd.fail(n, "solver.scan_refinement_max", "must be in 0..12");
            so.scan_refinement_max = static_cast<int>(v);
        }
        if (const auto n = sol["lambda_min_override"])
            so.lambda_min_override = rd.real(n, "solver.lambda_min_override");
    }

    if (const auto tr = root["trace"]) {
        rd.check_keys(tr, "trace", {"n_terms", "convention", "assert_tol"});
        if (const auto n = tr["n_terms"]) {
            cfg.trace.n_terms = rd.integer(n, "trace.n_terms");
            if (cfg.trace.n_terms < 64) rd.fail(n, "trace.n_terms", "must be >= 64");
        }
        if (const auto n = tr["convention"]) {
            const auto v = rd.word(n, "trace.convention");
            if (v == "theorem") cfg.trace.convention = TraceConvention::theorem;
            else if (v == "series31") cfg.trace.convention = TraceConvention::series31;
            else rd.fail(n, "trace.convention", "expected theorem or series31, got '" + v + "'");
        }
        if (const auto n = tr["assert_tol"]) {
            cfg.trace.assert_tol = rd.real(n, "trace.assert_tol");
            if (!(*cfg.trace.assert_tol >= 0.0)) rd.fail(n, "trace.assert_tol", "must be >= 0");
        }
    }

    try {
        (void)validate_problem(cfg.problem);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        rd.fail(prob, "problem", e.what());
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

} // namespace sltrace
