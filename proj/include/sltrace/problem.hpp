#pragma once

// Problem data for -u'' + q u = lambda u on [a,c1) U (c1,c2) U (c2,b] with
// u'(a) = 0, (lambda - h) u(b) - u'(b) = 0 and scaling transmission maps at
// c1 and c2. The potential is piecewise: one piece per subinterval.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sltrace/errors.hpp"
#include "sltrace/polynomial.hpp"

namespace sltrace {

enum class Side { left, right };

/// Which one-sided value stands in for q(c1), q(c2), q'(c2) in the
/// asymptotic coefficients and the closed-form trace.
enum class SideConvention { left, right, mean };

struct OneSidedLimits {
    double c1_left = 0.0;
    double c1_right = 0.0;
    double c2_left = 0.0;
    double c2_right = 0.0;
};

/// Callable-mode potential: one function per subinterval, each required to be
/// finite on its closed subinterval, plus the interface limits supplied
/// explicitly.
struct CallablePotential {
    std::array<std::function<double(double)>, 3> pieces;
    OneSidedLimits limits;
    double quad_abs_tol = 1e-11;
    double diff_step_fraction = 1e-6;   // first derivative step, times (b - a)
    double diff2_step_fraction = 1e-4;  // second derivative step, times (b - a)
};

struct PotentialSpec {
    std::vector<Polynomial> pieces;
    std::optional<CallablePotential> callable;

    static PotentialSpec piecewise(std::vector<std::vector<double>> coeffs) {
        PotentialSpec s;
        for (auto& c : coeffs) s.pieces.emplace_back(std::move(c));
        return s;
    }
    /// The same polynomial on all three subintervals.
    static PotentialSpec global(std::vector<double> coeffs) {
        return piecewise({coeffs, coeffs, coeffs});
    }
    static PotentialSpec constant(double value) { return global({value}); }
    static PotentialSpec from_callable(CallablePotential c) {
        PotentialSpec s;
        s.callable = std::move(c);
        return s;
    }
};

struct ProblemSpec {
    double a = 0.0;
    double b = 1.0;
    double c1 = 0.3;
    double c2 = 0.7;
    double delta = 1.0;
    double gamma = 1.0;
    double h = 0.0;
    PotentialSpec potential = PotentialSpec::constant(0.0);
};

struct ValidateOptions {
    std::size_t max_degree = 16;
};

class ValidatedProblem;
ValidatedProblem validate_problem(const ProblemSpec& raw, const ValidateOptions& opts = {});

/// Immutable, validated problem handle. Only validate_problem creates one.
class ValidatedProblem {
public:
    [[nodiscard]] const ProblemSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] double a() const noexcept { return spec_.a; }
    [[nodiscard]] double b() const noexcept { return spec_.b; }
    [[nodiscard]] double c1() const noexcept { return spec_.c1; }
    [[nodiscard]] double c2() const noexcept { return spec_.c2; }
    [[nodiscard]] double delta() const noexcept { return spec_.delta; }
    [[nodiscard]] double gamma() const noexcept { return spec_.gamma; }
    [[nodiscard]] double h() const noexcept { return spec_.h; }
    [[nodiscard]] double length() const noexcept { return spec_.b - spec_.a; }

    [[nodiscard]] bool is_polynomial() const noexcept { return !spec_.potential.callable; }

    /// True when a single polynomial governs all of [a,b], so split points can
    /// be moved without changing q.
    [[nodiscard]] bool is_global() const noexcept {
        const auto& p = spec_.potential.pieces;
        return is_polynomial() && p[0] == p[1] && p[1] == p[2];
    }

    /// Subinterval of piece k in {1,2,3}.
    [[nodiscard]] std::pair<double, double> piece_bounds(int k) const {
        switch (k) {
        case 1: return {spec_.a, spec_.c1};
        case 2: return {spec_.c1, spec_.c2};
        case 3: return {spec_.c2, spec_.b};
        default: throw DomainError("piece index must be 1, 2 or 3, got " + std::to_string(k));
        }
    }

    [[nodiscard]] const Polynomial& polynomial(int k) const { return spec_.potential.pieces.at(k - 1); }
    [[nodiscard]] const Polynomial& polynomial_derivative(int k) const { return dq_.at(k - 1); }
    [[nodiscard]] const Polynomial& polynomial_second_derivative(int k) const { return d2q_.at(k - 1); }
    [[nodiscard]] const CallablePotential& callable() const { return *spec_.potential.callable; }

    /// Value of piece k at x, without domain or side logic. Hot path of the
    /// integrator.
    [[nodiscard]] double piece_value(int k, double x) const {
        if (is_polynomial()) return spec_.potential.pieces[k - 1](x);
        return spec_.potential.callable->pieces[k - 1](x);
    }

private:
    friend ValidatedProblem validate_problem(const ProblemSpec&, const ValidateOptions&);
    explicit ValidatedProblem(ProblemSpec s) : spec_(std::move(s)) {
        if (is_polynomial()) {
            for (const auto& p : spec_.potential.pieces) {
                dq_.push_back(p.derivative());
                d2q_.push_back(dq_.back().derivative());
            }
        }
    }

    ProblemSpec spec_;
    std::vector<Polynomial> dq_;
    std::vector<Polynomial> d2q_;
};

inline ValidatedProblem validate_problem(const ProblemSpec& raw, const ValidateOptions& opts) {
    const double fields[] = {raw.a, raw.b, raw.c1, raw.c2, raw.delta, raw.gamma, raw.h};
    for (double v : fields)
        if (!std::isfinite(v)) throw NonFiniteError("problem fields must be finite");
    if (!(raw.a < raw.c1 && raw.c1 < raw.c2 && raw.c2 < raw.b))
        throw OrderingError("require a < c1 < c2 < b");
    if (raw.delta == 0.0) throw ZeroScalarError("delta must be nonzero");
    if (raw.gamma == 0.0) throw ZeroScalarError("gamma must be nonzero");

    const std::array<std::pair<double, double>, 3> bounds{
        std::pair{raw.a, raw.c1}, std::pair{raw.c1, raw.c2}, std::pair{raw.c2, raw.b}};

    if (raw.potential.callable) {
        if (!raw.potential.pieces.empty())
            throw PieceDomainError("potential has both polynomial pieces and a callable");
        const auto& c = *raw.potential.callable;
        for (int k = 0; k < 3; ++k) {
            if (!c.pieces[k]) throw PieceDomainError("callable piece " + std::to_string(k + 1) + " is empty");
            const auto [lo, hi] = bounds[k];
            for (int i = 0; i <= 32; ++i) {
                const double x = lo + (hi - lo) * i / 32.0;
                if (!std::isfinite(c.pieces[k](x)))
                    throw NonFiniteError("callable piece " + std::to_string(k + 1) + " is not finite at x=" +
                                         std::to_string(x));
            }
        }
        const double lim[] = {c.limits.c1_left, c.limits.c1_right, c.limits.c2_left, c.limits.c2_right};
        for (double v : lim)
            if (!std::isfinite(v)) throw NonFiniteError("interface limits must be finite");
        if (!(c.quad_abs_tol > 0.0) || !(c.diff_step_fraction > 0.0) || !(c.diff2_step_fraction > 0.0))
            throw DomainError("callable quadrature/difference settings must be positive");
        return ValidatedProblem(raw);
    }

    if (raw.potential.pieces.size() != 3)
        throw PieceDomainError("potential needs exactly 3 pieces, got " +
                               std::to_string(raw.potential.pieces.size()));
    for (int k = 0; k < 3; ++k) {
        const auto& p = raw.potential.pieces[k];
        if (p.degree() > opts.max_degree)
            throw PieceDomainError("piece " + std::to_string(k + 1) + " has degree " + std::to_string(p.degree()) +
                                   " above the cap " + std::to_string(opts.max_degree));
        for (double c : p.coeffs())
            if (!std::isfinite(c)) throw NonFiniteError("polynomial coefficients must be finite");
        const auto [lo, hi] = bounds[k];
        for (int i = 0; i <= 32; ++i)
            if (!std::isfinite(p(lo + (hi - lo) * i / 32.0)))
                throw NonFiniteError("piece " + std::to_string(k + 1) + " overflows on its subinterval");
    }
    return ValidatedProblem(raw);
}

namespace detail {

inline void require_in_domain(const ValidatedProblem& p, double x) {
    if (!(x >= p.a() && x <= p.b()))
        throw DomainError("x=" + std::to_string(x) + " outside [a,b]");
}

/// Piece governing x from the given side. At a and b only one side exists.
inline int piece_for(const ValidatedProblem& p, double x, Side side) {
    if (x < p.c1()) return 1;
    if (x == p.c1()) return side == Side::left ? 1 : 2;
    if (x < p.c2()) return 2;
    if (x == p.c2()) return side == Side::left ? 2 : 3;
    return 3;
}

/// First derivative of a callable piece by differences that stay on the piece.
inline double callable_derivative(const ValidatedProblem& p, int k, double x) {
    const auto& c = p.callable();
    const auto& f = c.pieces[k - 1];
    const auto [lo, hi] = p.piece_bounds(k);
    const double h = c.diff_step_fraction * p.length();
    if (x - h >= lo && x + h <= hi) return (f(x + h) - f(x - h)) / (2.0 * h);
    if (x + 2.0 * h <= hi) return (-3.0 * f(x) + 4.0 * f(x + h) - f(x + 2.0 * h)) / (2.0 * h);
    return (3.0 * f(x) - 4.0 * f(x - h) + f(x - 2.0 * h)) / (2.0 * h);
}

inline double callable_second_derivative(const ValidatedProblem& p, int k, double x) {
    const auto& c = p.callable();
    const auto& f = c.pieces[k - 1];
    const auto [lo, hi] = p.piece_bounds(k);
    const double h = c.diff2_step_fraction * p.length();
    if (x - h >= lo && x + h <= hi) return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
    if (x + 3.0 * h <= hi)
        return (2.0 * f(x) - 5.0 * f(x + h) + 4.0 * f(x + 2.0 * h) - f(x + 3.0 * h)) / (h * h);
    return (2.0 * f(x) - 5.0 * f(x - h) + 4.0 * f(x - 2.0 * h) - f(x - 3.0 * h)) / (h * h);
}

inline double simpson_recursive(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                                double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_recursive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_recursive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

/// Adaptive Simpson quadrature with absolute tolerance tol.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_recursive(f, a, b, fa, fm, fb, whole, tol, 50);
}

} // namespace detail

/// One-sided value of q at x. Away from c1 and c2 both sides agree.
inline double q_eval(const ValidatedProblem& p, double x, Side side) {
    detail::require_in_domain(p, x);
    const int k = detail::piece_for(p, x, side);
    if (!p.is_polynomial()) {
        const auto& lim = p.callable().limits;
        if (x == p.c1()) return side == Side::left ? lim.c1_left : lim.c1_right;
        if (x == p.c2()) return side == Side::left ? lim.c2_left : lim.c2_right;
    }
    return p.piece_value(k, x);
}

/// One-sided derivative of the governing piece at x.
inline double q_derivative(const ValidatedProblem& p, double x, Side side) {
    detail::require_in_domain(p, x);
    const int k = detail::piece_for(p, x, side);
    if (p.is_polynomial()) return p.polynomial_derivative(k)(x);
    return detail::callable_derivative(p, k, x);
}

inline double q_second_derivative(const ValidatedProblem& p, double x, Side side) {
    detail::require_in_domain(p, x);
    const int k = detail::piece_for(p, x, side);
    if (p.is_polynomial()) return p.polynomial_second_derivative(k)(x);
    return detail::callable_second_derivative(p, k, x);
}

/// q (or q', via the accessor) at an interface under a side convention.
inline double q_with_convention(const ValidatedProblem& p, double x, SideConvention conv,
                                double (*accessor)(const ValidatedProblem&, double, Side) = &q_eval) {
    switch (conv) {
    case SideConvention::left: return accessor(p, x, Side::left);
    case SideConvention::right: return accessor(p, x, Side::right);
    case SideConvention::mean: return 0.5 * (accessor(p, x, Side::left) + accessor(p, x, Side::right));
    }
    return accessor(p, x, Side::left);
}

/// Integral of q over [x0, x1], piecewise exact for polynomial potentials.
inline double q_integral(const ValidatedProblem& p, double x0, double x1) {
    detail::require_in_domain(p, x0);
    detail::require_in_domain(p, x1);
    if (x0 > x1) throw DomainError("q_integral needs x0 <= x1");
    double total = 0.0;
    for (int k = 1; k <= 3; ++k) {
        const auto [lo, hi] = p.piece_bounds(k);
        const double u = std::max(x0, lo);
        const double v = std::min(x1, hi);
        if (u >= v) continue;
        if (p.is_polynomial()) {
            total += p.polynomial(k).integral(u, v);
        } else {
            const auto& c = p.callable();
            total += detail::adaptive_simpson(c.pieces[k - 1], u, v, c.quad_abs_tol);
        }
    }
    return total;
}

struct QIntegrals {
    double Q1 = 0.0;   // over [a, c1]
    double Q2 = 0.0;   // over [c1, c2]
    double Q3b = 0.0;  // over [c2, b]
    std::function<double(double)> Q3_at;  // x in [c2, b] -> integral over [c2, x]
};

inline QIntegrals compute_Q(const ValidatedProblem& p) {
    QIntegrals q;
    q.Q1 = q_integral(p, p.a(), p.c1());
    q.Q2 = q_integral(p, p.c1(), p.c2());
    q.Q3b = q_integral(p, p.c2(), p.b());
    q.Q3_at = [p](double x) {
        if (x < p.c2() || x > p.b()) throw DomainError("Q3(x) needs x in [c2, b]");
        return q_integral(p, p.c2(), x);
    };
    return q;
}

/// Approximate sup-norm of q on [a,b] from dense sampling of each piece.
inline double q_sup_norm(const ValidatedProblem& p) {
    double m = 0.0;
    for (int k = 1; k <= 3; ++k) {
        const auto [lo, hi] = p.piece_bounds(k);
        for (int i = 0; i <= 256; ++i) m = std::max(m, std::abs(p.piece_value(k, lo + (hi - lo) * i / 256.0)));
    }
    return m;
}

/// Rebuilds the problem with new transmission scalars.
inline ValidatedProblem with_scalars(const ValidatedProblem& p, double delta, double gamma) {
    ProblemSpec s = p.spec();
    s.delta = delta;
    s.gamma = gamma;
    return validate_problem(s);
}

/// Rebuilds a globally defined problem with new split points.
inline ValidatedProblem with_splits(const ValidatedProblem& p, double c1, double c2) {
    if (!p.is_global()) throw DomainError("moving split points needs a globally defined polynomial q");
    ProblemSpec s = p.spec();
    s.c1 = c1;
    s.c2 = c2;
    return validate_problem(s);
}

} // namespace sltrace
