#pragma once

// Eigenvalue location with index certification. Every bracket is checked
// against the Pruefer count N(lambda) = #{eigenvalues <= lambda}.
//
// The low part of the spectrum is found by scanning omega for sign changes.
// Above the scan ceiling, eigenvalue n is bracketed directly as the root of
// F(lambda) - n*pi, where F is the counting angle; F increases by pi per
// eigenvalue and grows like s*(b-a), so a secant step in s lands close to
// the root.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "sltrace/asymptotics.hpp"
#include "sltrace/errors.hpp"
#include "sltrace/problem.hpp"
#include "sltrace/shooting.hpp"

namespace sltrace {

struct EigenvalueRecord {
    long n = 0;
    double lambda = 0.0;
    double s = 0.0;         // sqrt(lambda); -sqrt(-lambda) marks a negative eigenvalue
    double residual = 0.0;  // |omega(lambda)| in rescaled units
    double omega_scale = 0.0;
    std::pair<double, double> bracket{0.0, 0.0};
    bool certified = false;
};

struct Bracket {
    double lo = 0.0;
    double hi = 0.0;
};

struct ScanResult {
    std::vector<Bracket> brackets;
    long count_lo = 0;  // N(lambda_min)
    long count_hi = 0;  // N(lambda_max)
    int refinements = 0;
    std::vector<std::string> diagnostics;
};

struct SpectrumOptions {
    ShootingOptions shooting;
    double tol = 1e-15;
    int scan_refinement_max = 4;
    std::optional<double> lambda_min_override;
    long scan_index_limit = 40;  // indices above this are bracketed directly
};

struct Spectrum {
    std::vector<EigenvalueRecord> records;
    std::vector<std::string> diagnostics;
    double lambda_min = 0.0;
    double lambda_max = 0.0;

    [[nodiscard]] bool all_certified() const {
        return std::all_of(records.begin(), records.end(), [](const auto& r) { return r.certified; });
    }
};

struct AsymptoticResiduals {
    std::vector<std::pair<long, double>> deviations;  // (n, lambda_n - lambda_asym(n))
    double decay_exponent = std::numeric_limits<double>::quiet_NaN();
    double scaled_bound = 0.0;  // max |deviation| (n - 1/2)^2 over n >= 1
};

namespace detail {

/// omega and the counting angle at one lambda.
struct OmegaSample {
    double lambda = 0.0;
    double omega = 0.0;  // rescaled units
    double amplitude = 0.0;
    double angle = 0.0;  // counting angle F
    int negative_factors = 0;

    [[nodiscard]] long count() const { return eigen_count(angle); }

    /// Sign of omega; an exact zero takes the sign omega has just above it.
    [[nodiscard]] int sign() const {
        if (omega > 0.0) return 1;
        if (omega < 0.0) return -1;
        const long k = std::lround(angle / std::numbers::pi) + negative_factors;
        return k % 2 == 0 ? 1 : -1;
    }
};

inline OmegaSample sample(const ValidatedProblem& p, double lambda, const ShootingOptions& opts) {
    const auto bd = propagate_solution(p, lambda, opts);
    return {lambda, omega_from(p, lambda, bd), omega_amplitude(p, lambda, bd), counting_angle(p, lambda, bd),
            bd.negative_factors};
}

inline double signed_root(double lambda) { return lambda >= 0.0 ? std::sqrt(lambda) : -std::sqrt(-lambda); }

/// Scan grid: 200 * 2^level points uniform in lambda on the negative part,
/// uniform in s with step pi / (8 L 2^level) on the positive part.
inline std::vector<double> scan_grid(double lmin, double lmax, double length, int level) {
    std::vector<double> g;
    const double scale = std::ldexp(1.0, level);
    if (lmin < 0.0) {
        const double top = std::min(lmax, 0.0);
        const long n = static_cast<long>(200 * scale);
        for (long i = 0; i < n; ++i) g.push_back(lmin + (top - lmin) * static_cast<double>(i) / (n - 1));
    }
    if (lmax > 0.0) {
        const double s0 = lmin > 0.0 ? std::sqrt(lmin) : 0.0;
        const double s1 = std::sqrt(lmax);
        const double ds = std::numbers::pi / (8.0 * length * scale);
        if (g.empty()) g.push_back(s0 * s0);
        for (long k = 1;; ++k) {
            const double s = s0 + ds * static_cast<double>(k);
            if (s >= s1) break;
            g.push_back(s * s);
        }
        g.push_back(lmax);
    }
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

/// Bracketing refinement of fn on [lo, hi] (opposite signs at the ends).
/// Returns the final bracket and the evaluated samples at its ends.
template <class Fn>
std::pair<OmegaSample, OmegaSample> refine_bracket(const ValidatedProblem& p, const OmegaSample& lo,
                                                   const OmegaSample& hi, Fn value, double tol,
                                                   const ShootingOptions& opts) {
    std::vector<OmegaSample> seen{lo, hi};
    auto f = [&](double lambda) {
        seen.push_back(sample(p, lambda, opts));
        return value(seen.back());
    };
    auto done = [tol](double x, double y) {
        const double m = std::max(std::abs(x), std::abs(y));
        const double w = std::abs(y - x);
        return w <= tol * (1.0 + m) || w <= 4.0 * m * std::numeric_limits<double>::epsilon();
    };
    std::uintmax_t iters = 300;
    const auto r = boost::math::tools::toms748_solve(f, lo.lambda, hi.lambda, value(lo), value(hi), done, iters);
    if (!done(r.first, r.second)) throw ToleranceFailure("root refinement did not reach the tolerance");
    auto find = [&](double x) {
        for (auto it = seen.rbegin(); it != seen.rend(); ++it)
            if (it->lambda == x) return *it;
        return sample(p, x, opts);
    };
    return {find(r.first), find(r.second)};
}

/// Record for the root inside the final bracket [a, b]. The index is
/// certified on the outer bracket [lo, hi], whose ends sit well away from the
/// root: N(lo) = n and N(hi) = n + 1.
inline EigenvalueRecord make_record(const OmegaSample& a, const OmegaSample& b, const OmegaSample& lo,
                                    const OmegaSample& hi, long n) {
    const auto& best = std::abs(a.omega / a.amplitude) <= std::abs(b.omega / b.amplitude) ? a : b;
    EigenvalueRecord r;
    r.n = n;
    r.lambda = best.lambda;
    r.s = signed_root(best.lambda);
    r.residual = std::abs(best.omega);
    r.omega_scale = best.amplitude;
    r.bracket = {a.lambda, b.lambda};
    r.certified = lo.count() == n && hi.count() == n + 1;
    return r;
}

/// Outer bracket for a root found exactly on a grid point: a point slightly
/// above it, closer than any neighbouring eigenvalue.
inline OmegaSample just_above(const ValidatedProblem& p, double lambda, const ShootingOptions& opts) {
    return sample(p, lambda + 1e-9 * (1.0 + std::abs(lambda)), opts);
}

inline OmegaSample just_below(const ValidatedProblem& p, double lambda, const ShootingOptions& opts) {
    return sample(p, lambda - 1e-9 * (1.0 + std::abs(lambda)), opts);
}

/// Outer ends for certifying index n. A scan point that coincides with the
/// root to rounding has an ambiguous count; it is replaced by a point just
/// outside the bracket.
inline std::pair<OmegaSample, OmegaSample> certification_ends(const ValidatedProblem& p, const OmegaSample& lo,
                                                              const OmegaSample& hi, long n,
                                                              const ShootingOptions& opts) {
    return {lo.count() == n ? lo : just_below(p, lo.lambda, opts),
            hi.count() == n + 1 ? hi : just_above(p, hi.lambda, opts)};
}

inline std::string multiplicity_check(const OmegaSample& lo, const OmegaSample& hi, long n) {
    if (hi.lambda <= lo.lambda) return {};
    const double slope = (hi.angle - lo.angle) / (hi.lambda - lo.lambda);
    if (slope < 1e-6)
        return "MultiplicityWarning: n=" + std::to_string(n) + " has |d omega/d lambda| below 1e-6 of its scale";
    return {};
}

} // namespace detail

/// All sign changes of omega on [lambda_min, lambda_max], checked against the
/// Pruefer count and refined until both agree.
inline ScanResult scan_sign_changes(const ValidatedProblem& p, double lambda_min, double lambda_max,
                                    const SpectrumOptions& opts = {}) {
    if (!(lambda_min < lambda_max)) throw DomainError("scan needs lambda_min < lambda_max");
    ScanResult out;
    for (int level = 0;; ++level) {
        const auto grid = detail::scan_grid(lambda_min, lambda_max, p.length(), level);
        std::vector<detail::OmegaSample> samples;
        samples.reserve(grid.size());
        for (double l : grid) samples.push_back(detail::sample(p, l, opts.shooting));

        out.brackets.clear();
        bool monotone = true;
        for (std::size_t i = 1; i < samples.size(); ++i) {
            if (samples[i].sign() != samples[i - 1].sign()) out.brackets.push_back({grid[i - 1], grid[i]});
            if (samples[i].angle < samples[i - 1].angle - 1e-9 * (1.0 + std::abs(samples[i].angle)))
                monotone = false;
        }
        out.count_lo = samples.front().count();
        out.count_hi = samples.back().count();
        out.refinements = level;
        const bool counts_agree = static_cast<long>(out.brackets.size()) == out.count_hi - out.count_lo;
        if (!monotone)
            out.diagnostics.push_back("MonotonicityWarning: counting angle decreased on the level-" +
                                      std::to_string(level) + " grid");
        if (counts_agree && monotone) return out;
        if (level >= opts.scan_refinement_max) {
            if (counts_agree) return out;
            throw BudgetExceeded("scan found " + std::to_string(out.brackets.size()) + " sign changes but the count says " +
                                 std::to_string(out.count_hi - out.count_lo) + " after " + std::to_string(level) +
                                 " refinements");
        }
    }
}

/// Refines a sign-change bracket of omega to |dlambda| <= tol (1 + |lambda|).
inline EigenvalueRecord refine_root(const ValidatedProblem& p, Bracket br, double tol = 1e-15,
                                    const ShootingOptions& opts = {}) {
    if (!(br.lo <= br.hi)) throw DomainError("bracket must satisfy lo <= hi");
    const auto lo = detail::sample(p, br.lo, opts);
    const auto hi = detail::sample(p, br.hi, opts);
    auto at_end = [&](const detail::OmegaSample& x) {
        const auto above = detail::just_above(p, x.lambda, opts);
        return detail::make_record(x, x, detail::just_below(p, x.lambda, opts), above, above.count() - 1);
    };
    if (hi.omega == 0.0) return at_end(hi);
    if (lo.omega == 0.0) return at_end(lo);
    if (lo.sign() == hi.sign()) throw NoSignChange("omega has the same sign at both bracket ends");
    const auto [a, b] = detail::refine_bracket(
        p, lo, hi, [](const detail::OmegaSample& x) { return x.omega / x.amplitude; }, tol, opts);
    const long n = detail::just_below(p, a.lambda, opts).count();
    const auto [lo_c, hi_c] = detail::certification_ends(p, lo, hi, n, opts);
    return detail::make_record(a, b, lo_c, hi_c, n);
}

/// The lowest `count` eigenvalues with certified indices 0..count-1.
inline Spectrum compute_spectrum(const ValidatedProblem& p, long count, const SpectrumOptions& opts = {}) {
    if (count < 1) throw DomainError("count must be >= 1");
    const double L = p.length();
    const double pi = std::numbers::pi;
    const double alpha1 = 0.5 * [&] {
        const auto Q = compute_Q(p);
        return Q.Q1 + Q.Q2 + Q.Q3b;
    }();
    Spectrum out;

    double lmin = opts.lambda_min_override.value_or(-std::pow(q_sup_norm(p) + std::abs(p.h()) + 1.0, 2));
    auto smin = detail::sample(p, lmin, opts.shooting);
    for (int i = 0; smin.count() > 0; ++i) {
        if (i == 60) throw BudgetExceeded("no lambda with an empty count found below the spectrum");
        if (i == 0 && opts.lambda_min_override)
            out.diagnostics.push_back("lambda_min_override lies above the lowest eigenvalue; extended downwards");
        lmin = std::min(4.0 * lmin - 1.0, -1.0);
        smin = detail::sample(p, lmin, opts.shooting);
    }

    long top_index = count + 2;
    double lmax = eig_asymptotic(top_index, L, alpha1).lambda;
    auto smax = detail::sample(p, std::max(lmax, lmin + 1.0), opts.shooting);
    for (int i = 0; smax.count() < count; ++i) {
        if (i == 60) throw BudgetExceeded("scan ceiling does not reach the requested count");
        top_index *= 2;
        lmax = eig_asymptotic(top_index, L, alpha1).lambda;
        smax = detail::sample(p, std::max(lmax, lmin + 1.0), opts.shooting);
    }
    lmax = smax.lambda;
    out.lambda_min = lmin;
    out.lambda_max = lmax;

    // Scan phase.
    const long scan_top = std::min(count + 2, opts.scan_index_limit);
    double lscan = std::min(lmax, std::max(eig_asymptotic(scan_top, L, alpha1).lambda, 4.0));
    if (lscan <= lmin) lscan = lmax;
    auto scan = scan_sign_changes(p, lmin, lscan, opts);
    out.diagnostics.insert(out.diagnostics.end(), scan.diagnostics.begin(), scan.diagnostics.end());
    if (scan.count_lo != 0) throw CertificationFailure("count at lambda_min is not zero");
    for (std::size_t j = 0; j < scan.brackets.size() && static_cast<long>(j) < count; ++j) {
        const auto lo = detail::sample(p, scan.brackets[j].lo, opts.shooting);
        const auto hi = detail::sample(p, scan.brackets[j].hi, opts.shooting);
        const long n = static_cast<long>(j);
        if (hi.omega == 0.0) {
            out.records.push_back(detail::make_record(hi, hi, lo, detail::just_above(p, hi.lambda, opts.shooting), n));
        } else {
            const auto [a, b] = detail::refine_bracket(
                p, lo, hi, [](const detail::OmegaSample& x) { return x.omega / x.amplitude; }, opts.tol,
                opts.shooting);
            const auto [lo_c, hi_c] = detail::certification_ends(p, lo, hi, n, opts.shooting);
            out.records.push_back(detail::make_record(a, b, lo_c, hi_c, n));
        }
        if (auto w = detail::multiplicity_check(lo, hi, n); !w.empty()) out.diagnostics.push_back(w);
    }

    // Direct bracketing above the scan ceiling.
    auto below = detail::sample(p, lscan, opts.shooting);
    for (long n = static_cast<long>(out.records.size()); n < count; ++n) {
        auto G = [n, pi](const detail::OmegaSample& x) { return x.angle - static_cast<double>(n) * pi; };
        if (!out.records.empty()) {
            const auto& prev = out.records.back();
            if (prev.bracket.second >= below.lambda) below = detail::just_above(p, prev.bracket.second, opts.shooting);
        }
        if (G(below) >= 0.0) throw CertificationFailure("counting angle already past index " + std::to_string(n));

        // Extrapolate s from the two previous roots, else step by pi / L.
        const std::size_t m = out.records.size();
        double s_guess = std::sqrt(std::max(below.lambda, 1.0)) + pi / L;
        if (m >= 2 && out.records[m - 2].lambda > 0.0)
            s_guess = 2.0 * out.records[m - 1].s - out.records[m - 2].s;
        else if (m >= 1 && out.records[m - 1].lambda > 0.0)
            s_guess = out.records[m - 1].s + pi / L;

        detail::OmegaSample lo = below;
        std::optional<detail::OmegaSample> hi;
        double margin = 1e-9 * s_guess + 1e-12;
        double s_try = std::max(s_guess, std::sqrt(std::max(lo.lambda, 0.0)) + margin);
        for (int it = 0; !hi; ++it) {
            if (it == 60) throw BudgetExceeded("could not bracket eigenvalue " + std::to_string(n));
            auto x = detail::sample(p, s_try * s_try, opts.shooting);
            const double g = G(x);
            if (g > 0.0) {
                hi = x;
                break;
            }
            if (g == 0.0) {
                hi = x;
                lo = x;
                break;
            }
            const double s_lo = std::sqrt(lo.lambda > 0.0 ? lo.lambda : 0.0);
            double slope = L;
            if (lo.lambda > 0.0 && x.lambda > lo.lambda && x.angle > lo.angle)
                slope = std::max((x.angle - lo.angle) / (s_try - s_lo), 0.25 * L);
            lo = x;
            s_try = s_try - g / slope + margin;
            margin *= 4.0;
        }

        if (hi->lambda == lo.lambda) {
            out.records.push_back(
                detail::make_record(*hi, *hi, below, detail::just_above(p, hi->lambda, opts.shooting), n));
            continue;
        }
        const auto [a, b] = detail::refine_bracket(p, lo, *hi, G, opts.tol, opts.shooting);
        out.records.push_back(detail::make_record(a, b, lo, *hi, n));
        if (auto w = detail::multiplicity_check(lo, *hi, n); !w.empty()) out.diagnostics.push_back(w);
    }

    for (std::size_t i = 0; i < out.records.size(); ++i) {
        auto& r = out.records[i];
        if (r.n != static_cast<long>(i) || (i > 0 && !(r.lambda > out.records[i - 1].lambda))) {
            r.certified = false;
        }
        if (!r.certified)
            out.diagnostics.push_back("CertificationFailure: record " + std::to_string(i) +
                                      " failed the index check");
    }
    return out;
}

inline void require_certified(const Spectrum& s) {
    for (const auto& r : s.records)
        if (!r.certified) throw CertificationFailure("eigenvalue " + std::to_string(r.n) + " is not certified");
}

/// Deviation of each record from lambda_n = ((n - 1/2) pi / L)^2 + K and the
/// decay exponent of |deviation| fitted over the top half of the indices.
inline AsymptoticResiduals asymptotic_residuals(const std::vector<EigenvalueRecord>& records,
                                                const ValidatedProblem& p) {
    AsymptoticResiduals out;
    const double K = compute_K(p);
    const double alpha1 = 0.5 * K * p.length() - 1.0;
    for (const auto& r : records) {
        const double dev = r.lambda - eig_asymptotic(r.n, p.length(), alpha1).lambda;
        out.deviations.emplace_back(r.n, dev);
        if (r.n >= 1) {
            const double m = static_cast<double>(r.n) - 0.5;
            out.scaled_bound = std::max(out.scaled_bound, std::abs(dev) * m * m);
        }
    }
    if (records.empty()) return out;
    const long top = records.back().n;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    long k = 0;
    for (const auto& [n, dev] : out.deviations) {
        if (n < 1 || 2 * n < top || dev == 0.0) continue;
        const double x = std::log(static_cast<double>(n));
        const double y = std::log(std::abs(dev));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++k;
    }
    if (k >= 2) {
        const double den = k * sxx - sx * sx;
        if (den > 0.0) out.decay_exponent = (k * sxy - sx * sy) / den;
    }
    return out;
}

} // namespace sltrace
