#pragma once

// Closed-form machinery for q = 0 and the transmission factorization check.
// Nothing here goes through the spectrum solver.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "sltrace/errors.hpp"
#include "sltrace/problem.hpp"
#include "sltrace/shooting.hpp"

namespace sltrace {

struct OracleRoot {
    long n = 0;
    double s_or_t = 0.0;  // s for lambda >= 0, t = sqrt(-lambda) for lambda < 0
    double lambda = 0.0;
    double equation_residual = 0.0;
};

/// omega for q = 0 on an interval of length L:
///   lambda = s^2 >= 0:  (1/gamma) [(lambda - h) cos(sL) + s sin(sL)]
///   lambda = -t^2 < 0:  (1/gamma) cosh(tL) [(lambda - h) - t tanh(tL)]
inline double oracle_omega_qzero(double L, double gamma, double h, double lambda) {
    if (!(L > 0.0)) throw DomainError("L must be positive");
    if (gamma == 0.0) throw ZeroScalarError("gamma must be nonzero");
    if (lambda >= 0.0) {
        const double s = std::sqrt(lambda);
        return ((lambda - h) * std::cos(s * L) + s * std::sin(s * L)) / gamma;
    }
    const double t = std::sqrt(-lambda);
    return std::cosh(t * L) * ((lambda - h) - t * std::tanh(t * L)) / gamma;
}

namespace detail {

template <class F>
double bisect_full(F f, double lo, double hi) {
    double flo = f(lo);
    for (int i = 0; i < 400; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
}

} // namespace detail

/// Lowest `count` roots of the q = 0 characteristic equation, by bisection.
/// A negative root exists iff h < 0; lambda = 0 is a root iff h = 0.
inline std::vector<OracleRoot> oracle_eigs_qzero(double L, double h, long count) {
    if (!(L > 0.0)) throw DomainError("L must be positive");
    if (count < 1) throw DomainError("count must be >= 1");
    std::vector<OracleRoot> out;
    auto push = [&](double st, double lambda, double residual) {
        out.push_back({static_cast<long>(out.size()), st, lambda, residual});
    };

    if (h < 0.0) {
        // t^2 + t tanh(tL) = -h, increasing in t
        auto g = [&](double t) { return t * t + t * std::tanh(t * L) + h; };
        const double t = detail::bisect_full(g, 0.0, std::sqrt(-h) + 1.0);
        push(t, -t * t, std::abs(g(t)) / (t * t + t + std::abs(h)));
    } else if (h == 0.0) {
        push(0.0, 0.0, 0.0);
    }

    auto f = [&](double s) { return (s * s - h) * std::cos(s * L) + s * std::sin(s * L); };
    auto normalized = [&](double s) { return std::abs(f(s)) / std::hypot(s * s - h, s); };
    const double ds = std::numbers::pi / (64.0 * L);
    double s = 1e-9 * ds;
    double fs = f(s);
    while (static_cast<long>(out.size()) < count) {
        const double t = s + ds;
        const double ft = f(t);
        if ((fs < 0.0) != (ft < 0.0)) {
            const double r = detail::bisect_full(f, s, t);
            push(r, r * r, normalized(r));
        }
        s = t;
        fs = ft;
    }
    out.resize(static_cast<std::size_t>(count));
    return out;
}

/// max over the grid of |gamma omega_{delta,gamma} - omega_{1,1}| / (1 + |omega_{1,1}|).
inline double factorization_check(const ValidatedProblem& p, const std::vector<double>& lambda_grid,
                                  const ShootingOptions& opts = {}) {
    if (lambda_grid.empty()) throw DomainError("lambda grid is empty");
    const auto plain = with_scalars(p, 1.0, 1.0);
    double worst = 0.0;
    for (double l : lambda_grid) {
        const double w = char_function(p, l, opts);
        const double w11 = char_function(plain, l, opts);
        worst = std::max(worst, std::abs(p.gamma() * w - w11) / (1.0 + std::abs(w11)));
    }
    return worst;
}

} // namespace sltrace
