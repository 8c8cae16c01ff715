#pragma once

// Subcommand bodies. Each returns the complete output text and an exit code;
// nothing is written until the command has finished.
//   0 ok, 2 configuration or usage, 3 convergence or certification, 4 trace
//   deviation above assert_tol.

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sltrace/asymptotics.hpp"
#include "sltrace/config.hpp"
#include "sltrace/errors.hpp"
#include "sltrace/problem.hpp"
#include "sltrace/reference.hpp"
#include "sltrace/shooting.hpp"
#include "sltrace/spectrum.hpp"
#include "sltrace/trace.hpp"

namespace sltrace {

struct CommandResult {
    int exit_code = 0;
    std::string output;
    std::string error;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config = 2;
inline constexpr int numerical = 3;
inline constexpr int assertion = 4;
} // namespace exit_code

/// Shortest representation that reads back to the same double.
inline std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline std::string to_string(SideConvention c) {
    switch (c) {
    case SideConvention::left: return "left";
    case SideConvention::right: return "right";
    case SideConvention::mean: return "mean";
    }
    return "left";
}

namespace detail {

template <class Body>
CommandResult guarded(Body body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        return {exit_code::config, {}, e.what()};
    } catch (const OrderingError& e) {
        return {exit_code::config, {}, e.what()};
    } catch (const ZeroScalarError& e) {
        return {exit_code::config, {}, e.what()};
    } catch (const PieceDomainError& e) {
        return {exit_code::config, {}, e.what()};
    } catch (const NonFiniteError& e) {
        return {exit_code::config, {}, e.what()};
    } catch (const Error& e) {
        return {exit_code::numerical, {}, e.what()};
    }
}

/// lambda_asym column: s_n^2 from the s-form for n >= 1, the lambda-form for n = 0.
inline double lambda_asym_column(long n, double length, double alpha1) {
    const auto e = eig_asymptotic(n, length, alpha1);
    return e.s ? (*e.s) * (*e.s) : e.lambda;
}

inline nlohmann::json report_json(const TraceReport& r) {
    nlohmann::json table = nlohmann::json::array();
    for (const auto& [n, t] : r.per_term_table) table.push_back({n, t});
    return {{"convention", to_string(r.convention)},
            {"n_terms", r.n_terms},
            {"partial_sum", r.partial_sum},
            {"tail_estimate", r.tail_estimate},
            {"tail_uncertainty", r.tail_uncertainty},
            {"total", r.total},
            {"closed_form_rhs", r.closed_form_rhs},
            {"deviation", r.deviation},
            {"stability", r.stability},
            {"per_term_table", table},
            {"diagnostics", r.diagnostics}};
}

} // namespace detail

inline CommandResult cmd_eig(const RunConfig& cfg, long count) {
    if (count < 1) return {exit_code::config, {}, "eig: --count must be >= 1"};
    return detail::guarded([&]() -> CommandResult {
        const auto p = validate_problem(cfg.problem);
        const auto spec = compute_spectrum(p, count, cfg.solver);
        require_certified(spec);
        const double alpha1 = 0.5 * compute_K(p) * p.length() - 1.0;
        std::ostringstream os;
        os << "n,lambda,s,residual,lambda_asym,deviation\n";
        for (const auto& r : spec.records) {
            const double asym = detail::lambda_asym_column(r.n, p.length(), alpha1);
            os << r.n << ',' << format_real(r.lambda) << ',' << format_real(r.s) << ',' << format_real(r.residual)
               << ',' << format_real(asym) << ',' << format_real(r.lambda - asym) << '\n';
        }
        return {exit_code::ok, os.str(), {}};
    });
}

/// Grid uniform in sign(lambda) sqrt|lambda|, so uniform in s on the positive part.
inline std::vector<double> scan_points(double lambda_min, double lambda_max, long points) {
    auto root = [](double l) { return l >= 0.0 ? std::sqrt(l) : -std::sqrt(-l); };
    const double t0 = root(lambda_min), t1 = root(lambda_max);
    std::vector<double> out;
    for (long i = 0; i < points; ++i) {
        if (i == 0) {
            out.push_back(lambda_min);
        } else if (i == points - 1) {
            out.push_back(lambda_max);
        } else {
            const double t = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(points - 1);
            out.push_back(t >= 0.0 ? t * t : -t * t);
        }
    }
    return out;
}

inline CommandResult cmd_scan(const RunConfig& cfg, double lambda_min, double lambda_max, long points) {
    if (points < 2) return {exit_code::config, {}, "scan: --points must be >= 2"};
    if (!(lambda_min < lambda_max) || !std::isfinite(lambda_min) || !std::isfinite(lambda_max))
        return {exit_code::config, {}, "scan: need finite --min < --max"};
    return detail::guarded([&]() -> CommandResult {
        const auto p = validate_problem(cfg.problem);
        std::ostringstream os;
        os << "lambda,omega,theta_b\n";
        for (double l : scan_points(lambda_min, lambda_max, points)) {
            const auto bd = propagate_solution(p, l, cfg.solver.shooting);
            double w = omega_from(p, l, bd);
            if (bd.log_scale != 0.0) w *= std::exp(bd.log_scale);
            os << format_real(l) << ',' << format_real(w) << ',' << format_real(bd.theta_b) << '\n';
        }
        return {exit_code::ok, os.str(), {}};
    });
}

inline CommandResult cmd_trace(const RunConfig& cfg, std::optional<double> assert_tol_override = std::nullopt) {
    return detail::guarded([&]() -> CommandResult {
        const auto p = validate_problem(cfg.problem);
        const auto spec = compute_spectrum(p, cfg.trace.n_terms, cfg.solver);
        require_certified(spec);
        auto rep = trace_report_from(p, spec.records, cfg.trace.convention);
        rep.diagnostics.insert(rep.diagnostics.begin(), spec.diagnostics.begin(), spec.diagnostics.end());
        const auto other = trace_report_from(
            p, spec.records,
            cfg.trace.convention == TraceConvention::theorem ? TraceConvention::series31 : TraceConvention::theorem);
        const auto& th = cfg.trace.convention == TraceConvention::theorem ? rep : other;
        const auto& s31 = cfg.trace.convention == TraceConvention::theorem ? other : rep;
        const double L = p.length();
        const double conversion = std::numbers::pi * std::numbers::pi / (4.0 * L * L) + compute_K(p);

        auto j = detail::report_json(rep);
        j["conventions"] = {{"theorem_total", th.total},
                            {"series31_total", s31.total},
                            {"conversion_residual", (th.total - s31.total) + conversion}};
        const auto ac = alpha_coefficients(p, cfg.side_convention);
        j["asymptotic_coefficients"] = {{"side_convention", to_string(cfg.side_convention)},
                                        {"alpha1_b", ac.alpha1_b},
                                        {"alpha2_b", ac.alpha2_b},
                                        {"alpha3_b", ac.alpha3_b},
                                        {"alpha4_b", ac.alpha4_b},
                                        {"alpha1_prime_b", ac.alpha1_prime_b},
                                        {"K", ac.K}};
        if (p.is_global()) {
            nlohmann::json grid = nlohmann::json::array();
            for (const auto& g : splits_sensitivity(p)) grid.push_back({{"c1", g.c1}, {"c2", g.c2}, {"rhs", g.rhs}});
            j["splits_sensitivity"] = grid;
        }
        const auto tol = assert_tol_override ? assert_tol_override : cfg.trace.assert_tol;
        const bool exceeded = tol && std::abs(rep.deviation) > *tol;
        CommandResult res{exceeded ? exit_code::assertion : exit_code::ok, j.dump(2) + "\n", {}};
        if (exceeded)
            res.error = "trace: |deviation| = " + format_real(std::abs(rep.deviation)) + " exceeds assert_tol " +
                        format_real(*tol);
        return res;
    });
}

struct PropertyOutcome {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string detail;
};

/// Hard properties checked by `verify` on the configured problem.
inline std::vector<PropertyOutcome> verify_properties(const RunConfig& cfg) {
    const auto p = validate_problem(cfg.problem);
    const auto& so = cfg.solver;
    std::vector<PropertyOutcome> out;
    auto relerr = [](double x, double ref) { return std::abs(x - ref) / std::max(1.0, std::abs(ref)); };
    auto run = [&](const std::string& name, double threshold, auto body) {
        PropertyOutcome o{name, false, 0.0, threshold, {}};
        try {
            o.measured = body();
            o.pass = o.measured <= threshold;
        } catch (const Error& e) {
            o.measured = std::numeric_limits<double>::infinity();
            o.detail = e.what();
        }
        out.push_back(o);
    };

    run("qzero_oracle_equality", 1e-9, [&] {
        ProblemSpec z = cfg.problem;
        z.potential = PotentialSpec::constant(0.0);
        const auto pz = validate_problem(z);
        const auto spec = compute_spectrum(pz, 50, so);
        require_certified(spec);
        const auto oracle = oracle_eigs_qzero(pz.length(), pz.h(), 50);
        double worst = 0.0;
        for (std::size_t i = 0; i < oracle.size(); ++i)
            worst = std::max(worst, relerr(spec.records[i].lambda, oracle[i].lambda));
        return worst;
    });

    run("factorization", 1e-8, [&] {
        std::vector<double> grid;
        for (int i = 0; i < 100; ++i) grid.push_back(0.1 + (100.0 - 0.1) * i / 99.0);
        return factorization_check(p, grid, so.shooting);
    });

    run("delta_gamma_invariance", 1e-8, [&] {
        const auto ref = compute_spectrum(with_scalars(p, 1.0, 1.0), 20, so);
        require_certified(ref);
        double worst = 0.0;
        const std::pair<double, double> pairs[] = {
            {p.delta(), p.gamma()}, {2.0, 3.0}, {-1.0, 2.0}, {0.5, -4.0}};
        for (const auto& [d, g] : pairs) {
            const auto s = compute_spectrum(with_scalars(p, d, g), 20, so);
            require_certified(s);
            for (std::size_t i = 0; i < 20; ++i)
                worst = std::max(worst, relerr(s.records[i].lambda, ref.records[i].lambda));
        }
        return worst;
    });

    std::string per_lambda;
    run("reverse_integration", 1e-8, [&] {
        double worst = 0.0;
        for (double l : {-100.0, 1.0, 100.0, 1e4}) {
            const double e = reverse_integration_error(p, l, so.shooting);
            per_lambda += (per_lambda.empty() ? "" : " ") + format_real(l) + ":" + format_real(e);
            worst = std::max(worst, e);
        }
        return worst;
    });
    if (out.back().detail.empty()) out.back().detail = per_lambda;

    run("convention_conversion", 1e-12, [&] {
        const auto spec = compute_spectrum(p, 64, so);
        require_certified(spec);
        const auto th = trace_report_from(p, spec.records, TraceConvention::theorem);
        const auto s31 = trace_report_from(p, spec.records, TraceConvention::series31);
        const double L = p.length();
        return std::abs((th.total - s31.total) + (std::numbers::pi * std::numbers::pi / (4.0 * L * L) + compute_K(p)));
    });
    return out;
}

inline CommandResult cmd_verify(const RunConfig& cfg) {
    return detail::guarded([&]() -> CommandResult {
        const auto props = verify_properties(cfg);
        std::ostringstream os;
        nlohmann::json summary = nlohmann::json::array();
        bool all = true;
        for (const auto& o : props) {
            all = all && o.pass;
            os << (o.pass ? "PASS " : "FAIL ") << o.name << " measured=" << format_real(o.measured)
               << " threshold=" << format_real(o.threshold);
            if (!o.detail.empty()) os << " (" << o.detail << ")";
            os << '\n';
            summary.push_back({{"name", o.name},
                               {"pass", o.pass},
                               {"measured", o.measured},
                               {"threshold", o.threshold},
                               {"detail", o.detail}});
        }
        nlohmann::json j = {{"config", cfg.source}, {"all_pass", all}, {"properties", summary}};
        os << j.dump() << '\n';
        return {all ? exit_code::ok : exit_code::numerical, os.str(), all ? "" : "verify: hard property failed"};
    });
}

} // namespace sltrace
