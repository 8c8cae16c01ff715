#pragma once

// Shooting for the fundamental solution phi(x, lambda): phi(a) = 1, phi'(a) = 0,
// both components scaled by 1/delta at c1 and by delta/gamma at c2.
//
// Integration runs in scaled Pruefer variables
//     u = R cos(theta),  u' = -sigma R sin(theta),   sigma = max(1, sqrt|lambda|)
// with theta = nu (x - a) + psi, nu = sqrt(lambda) for lambda >= 1 and 0
// otherwise. For lambda >= 1 this leaves
//     psi'   = -(q / s) cos^2(theta)
//     ln R'  = -(q / s) sin(theta) cos(theta)
// so the integrated unknowns are O(1/s) and their absolute accuracy does not
// degrade with the eigenvalue index. ln R never overflows; u, u' are
// reconstructed only at the end.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>

#include "sltrace/detail/dop853.hpp"
#include "sltrace/errors.hpp"
#include "sltrace/problem.hpp"

namespace sltrace {

struct StateVector {
    double u = 1.0;
    double du = 0.0;
    double x = 0.0;
};

/// lambda together with s = sqrt(lambda); for lambda < 0, s = i t, t = sqrt(-lambda).
struct SpectralPoint {
    double lambda = 0.0;
    std::complex<double> s;

    static SpectralPoint from_lambda(double lambda) {
        if (lambda >= 0.0) return {lambda, {std::sqrt(lambda), 0.0}};
        return {lambda, {0.0, std::sqrt(-lambda)}};
    }
};

struct ShootingOptions {
    double rel_tol = 1e-11;
    double abs_tol = 1e-12;
    double max_step_phase = 0.5;  // step cap is this over max(1, sqrt|lambda|)
};

struct IntegratorStats {
    std::size_t steps = 0;
    double rel_tol = 0.0;
    double abs_tol = 0.0;
};

enum class Interface { c1, c2 };

struct BoundaryData {
    double phi_b = 0.0;      // phi_3(b, lambda), times exp(-log_scale)
    double dphi_b = 0.0;     // phi_3'(b, lambda), times exp(-log_scale)
    double theta_b = 0.0;    // continuous Pruefer angle at b
    double log_scale = 0.0;  // nonzero only when |ln R(b)| would overflow
    double sigma = 1.0;      // Pruefer scale used at this lambda
    int negative_factors = 0;
    IntegratorStats integrator_stats;
};

namespace detail {

using PolarState = std::array<double, 2>;  // {psi, ln R}

struct PruferFrame {
    double lambda;
    double sigma;
    double nu;
    double origin;
    bool oscillatory;  // lambda >= 1: sigma == nu == sqrt(lambda)
};

inline PruferFrame frame_for(const ValidatedProblem& p, double lambda) {
    if (!std::isfinite(lambda)) throw NonFiniteError("lambda must be finite");
    const double sigma = std::max(1.0, std::sqrt(std::abs(lambda)));
    const bool osc = lambda >= 1.0;
    return {lambda, sigma, osc ? sigma : 0.0, p.a(), osc};
}

/// Right-hand side of the polar system. In the oscillatory frame the stage
/// angles are obtained by rotating the anchor angle by the (cached) node
/// offsets nu*c_i*h and the small psi increment, so each step needs a single
/// full sincos.
template <class QFn>
struct PruferSystem {
    const QFn& q;
    PruferFrame f;
    double psi0 = 0.0;
    double cos0 = 1.0;
    double sin0 = 0.0;
    double h_cached = 0.0;
    std::array<double, 13> node_cos{};
    std::array<double, 13> node_sin{};

    void anchor(double x, const PolarState& y) {
        psi0 = y[0];
        const double theta = f.nu * (x - f.origin) + psi0;
        cos0 = std::cos(theta);
        sin0 = std::sin(theta);
    }

    void step_size(double h) {
        if (!f.oscillatory || h == h_cached) return;
        h_cached = h;
        for (std::size_t i = 0; i < node_cos.size(); ++i) {
            const double phi = f.nu * dop853c::c[i] * h;
            node_cos[i] = std::cos(phi);
            node_sin[i] = std::sin(phi);
        }
    }

    void operator()(std::size_t node, double x, const PolarState& y, PolarState& dy) const {
        const double qx = q(x);
        if (!f.oscillatory) {
            const double theta = f.nu * (x - f.origin) + y[0];
            const double c = std::cos(theta);
            const double s = std::sin(theta);
            const double coeff = (f.lambda - qx) / f.sigma;
            dy[0] = f.sigma * s * s + coeff * c * c;
            dy[1] = (coeff - f.sigma) * s * c;
            return;
        }
        double c = cos0, s = sin0;
        if (node != 0) {
            const double cn = node_cos[node], sn = node_sin[node];
            c = cos0 * cn - sin0 * sn;
            s = sin0 * cn + cos0 * sn;
        }
        const double d = y[0] - psi0;
        if (d != 0.0) {
            double cd, sd;
            if (std::abs(d) < 2e-3) {
                const double d2 = d * d;
                cd = 1.0 - d2 * (0.5 - d2 / 24.0);
                sd = d * (1.0 - d2 * (1.0 / 6.0 - d2 / 120.0));
            } else {
                cd = std::cos(d);
                sd = std::sin(d);
            }
            const double cc = c * cd - s * sd;
            s = s * cd + c * sd;
            c = cc;
        }
        const double w = qx / f.sigma;
        dy[0] = -w * c * c;
        dy[1] = -w * s * c;
    }
};

template <class QFn>
void integrate_polar_with(const QFn& q, const PruferFrame& f, PolarState& y, double x0, double x1,
                          double piece_length, const ShootingOptions& opts, IntegratorStats& stats) {
    if (x0 == x1) return;
    const double hmax = std::min(piece_length / 16.0, opts.max_step_phase / f.sigma);
    PruferSystem<QFn> sys{q, f};
    const auto r = dop853_integrate<2>(sys, y, x0, x1, hmax, opts.rel_tol, opts.abs_tol);
    stats.steps += r.accepted;
    if (!std::isfinite(y[0]) || !std::isfinite(y[1])) throw ToleranceFailure("integration produced a non-finite state");
}

/// Integrates piece k in polar form from x0 to x1 (either direction).
inline void integrate_polar(const ValidatedProblem& p, int k, const PruferFrame& f, PolarState& y, double x0,
                            double x1, const ShootingOptions& opts, IntegratorStats& stats) {
    const auto [lo, hi] = p.piece_bounds(k);
    if (p.is_polynomial()) {
        integrate_polar_with(p.polynomial(k), f, y, x0, x1, hi - lo, opts, stats);
    } else {
        integrate_polar_with(p.callable().pieces[k - 1], f, y, x0, x1, hi - lo, opts, stats);
    }
}

inline double transmission_factor(const ValidatedProblem& p, Interface at) {
    return at == Interface::c1 ? 1.0 / p.delta() : p.delta() / p.gamma();
}

/// Scaling both components by f keeps the angle (mod pi) and shifts ln R.
inline void scale_polar(PolarState& y, double factor) {
    y[1] += std::log(std::abs(factor));
    if (factor < 0.0) y[0] += std::numbers::pi;
}

inline int negative_factor_count(const ValidatedProblem& p) {
    return (transmission_factor(p, Interface::c1) < 0.0 ? 1 : 0) +
           (transmission_factor(p, Interface::c2) < 0.0 ? 1 : 0);
}

} // namespace detail

/// Integrates u'' = (q - lambda) u across piece k from its left endpoint.
inline StateVector integrate_piece(const ValidatedProblem& p, int piece, const StateVector& state, double lambda,
                                   const ShootingOptions& opts = {}, IntegratorStats* stats = nullptr) {
    const auto [lo, hi] = p.piece_bounds(piece);
    if (state.x != lo) throw PositionError("integrate_piece: state must sit at the piece's left endpoint");
    if (!std::isfinite(state.u) || !std::isfinite(state.du)) throw NonFiniteError("state must be finite");
    const auto f = detail::frame_for(p, lambda);
    const double r = std::hypot(state.u, state.du / f.sigma);
    if (r == 0.0) return {0.0, 0.0, hi};

    detail::PolarState y{std::atan2(-state.du / f.sigma, state.u) - f.nu * (lo - f.origin), std::log(r)};
    IntegratorStats local{0, opts.rel_tol, opts.abs_tol};
    detail::integrate_polar(p, piece, f, y, lo, hi, opts, local);
    if (stats) {
        stats->steps += local.steps;
        stats->rel_tol = opts.rel_tol;
        stats->abs_tol = opts.abs_tol;
    }
    if (y[1] > std::log(1e250)) throw OverflowGuard("solution exceeds 1e250; rescale (root locations are scale-invariant)");
    const double theta = f.nu * (hi - f.origin) + y[0];
    const double R = std::exp(y[1]);
    return {R * std::cos(theta), -f.sigma * R * std::sin(theta), hi};
}

/// Transmission data: both components times 1/delta at c1, times delta/gamma at c2.
inline StateVector apply_transmission(const ValidatedProblem& p, Interface at, const StateVector& state) {
    const double where = at == Interface::c1 ? p.c1() : p.c2();
    if (state.x != where) throw PositionError("apply_transmission: state is not at the interface");
    const double f = detail::transmission_factor(p, at);
    return {state.u * f, state.du * f, state.x};
}

/// phi_3(b), phi_3'(b) and the Pruefer angle at b for the given lambda.
inline BoundaryData propagate_solution(const ValidatedProblem& p, double lambda, const ShootingOptions& opts = {}) {
    const auto f = detail::frame_for(p, lambda);
    BoundaryData out;
    out.integrator_stats = {0, opts.rel_tol, opts.abs_tol};
    out.sigma = f.sigma;
    out.negative_factors = detail::negative_factor_count(p);

    detail::PolarState y{0.0, 0.0};  // theta(a) = 0, R(a) = 1
    detail::integrate_polar(p, 1, f, y, p.a(), p.c1(), opts, out.integrator_stats);
    detail::scale_polar(y, detail::transmission_factor(p, Interface::c1));
    detail::integrate_polar(p, 2, f, y, p.c1(), p.c2(), opts, out.integrator_stats);
    detail::scale_polar(y, detail::transmission_factor(p, Interface::c2));
    detail::integrate_polar(p, 3, f, y, p.c2(), p.b(), opts, out.integrator_stats);

    out.theta_b = f.nu * (p.b() - f.origin) + y[0];
    out.log_scale = std::abs(y[1]) > 600.0 ? y[1] : 0.0;
    const double R = std::exp(y[1] - out.log_scale);
    out.phi_b = R * std::cos(out.theta_b);
    out.dphi_b = -f.sigma * R * std::sin(out.theta_b);
    return out;
}

/// omega(lambda) = (lambda - h) phi_3(b) - phi_3'(b), in the units of bd
/// (multiply by exp(bd.log_scale) for the physical value).
inline double omega_from(const ValidatedProblem& p, double lambda, const BoundaryData& bd) {
    return (lambda - p.h()) * bd.phi_b - bd.dphi_b;
}

/// Amplitude of omega: omega = amplitude * sin(counting angle).
inline double omega_amplitude(const ValidatedProblem& p, double lambda, const BoundaryData& bd) {
    return std::hypot(bd.phi_b, bd.dphi_b / bd.sigma) * std::hypot(lambda - p.h(), bd.sigma);
}

/// theta_b plus the boundary-condition angle, with the pi shifts of negative
/// transmission factors removed. Eigenvalues are exactly where this equals
/// n*pi, and n is the eigenvalue index.
inline double counting_angle(const ValidatedProblem& p, double lambda, const BoundaryData& bd) {
    return bd.theta_b + std::atan((lambda - p.h()) / bd.sigma) - bd.negative_factors * std::numbers::pi;
}

/// Number of eigenvalues <= lambda.
inline long eigen_count(double counting_angle_value) {
    return static_cast<long>(std::floor(counting_angle_value / std::numbers::pi)) + 1;
}

inline double char_function(const ValidatedProblem& p, double lambda, const ShootingOptions& opts = {}) {
    const auto bd = propagate_solution(p, lambda, opts);
    const double w = omega_from(p, lambda, bd);
    return bd.log_scale == 0.0 ? w : w * std::exp(bd.log_scale);
}

inline double pruefer_angle(const ValidatedProblem& p, double lambda, const ShootingOptions& opts = {}) {
    return propagate_solution(p, lambda, opts).theta_b;
}

/// Shoots a -> b, then back b -> a through the inverse transmission maps, and
/// returns the distance of the recovered (u, u'/sigma) from (1, 0).
inline double reverse_integration_error(const ValidatedProblem& p, double lambda, const ShootingOptions& opts = {}) {
    const auto f = detail::frame_for(p, lambda);
    IntegratorStats stats;
    detail::PolarState y{0.0, 0.0};
    detail::integrate_polar(p, 1, f, y, p.a(), p.c1(), opts, stats);
    detail::scale_polar(y, detail::transmission_factor(p, Interface::c1));
    detail::integrate_polar(p, 2, f, y, p.c1(), p.c2(), opts, stats);
    detail::scale_polar(y, detail::transmission_factor(p, Interface::c2));
    detail::integrate_polar(p, 3, f, y, p.c2(), p.b(), opts, stats);

    detail::integrate_polar(p, 3, f, y, p.b(), p.c2(), opts, stats);
    detail::scale_polar(y, 1.0 / detail::transmission_factor(p, Interface::c2));
    detail::integrate_polar(p, 2, f, y, p.c2(), p.c1(), opts, stats);
    detail::scale_polar(y, 1.0 / detail::transmission_factor(p, Interface::c1));
    detail::integrate_polar(p, 1, f, y, p.c1(), p.a(), opts, stats);

    const double R = std::exp(y[1]);
    const double u = R * std::cos(y[0]);
    const double v = -R * std::sin(y[0]);  // u'/sigma
    return std::hypot(u - 1.0, v);
}

} // namespace sltrace
