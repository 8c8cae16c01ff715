#pragma once

// Large-s expansions of the fundamental solution and of omega, the
// alpha-coefficients that enter them, and the eigenvalue asymptotics.

#include <cmath>
#include <numbers>
#include <optional>
#include <utility>

#include "sltrace/errors.hpp"
#include "sltrace/problem.hpp"

namespace sltrace {

/// alpha_1..alpha_4 and the derivatives used by the expansions, at one x.
struct AlphaValues {
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double alpha3 = 0.0;
    double alpha4 = 0.0;
    double alpha1_prime = 0.0;
    double alpha3_prime = 0.0;
    double alpha4_prime = 0.0;
};

struct AsymptoticCoefficients {
    double alpha1_b = 0.0;
    double alpha2_b = 0.0;
    double alpha3_b = 0.0;
    double alpha4_b = 0.0;
    double alpha1_prime_b = 0.0;
    double K = 0.0;
    QIntegrals Q;
    SideConvention side_convention = SideConvention::left;
};

struct EigenAsymptotic {
    std::optional<double> s;  // s-form, defined for n >= 1
    double lambda = 0.0;      // lambda-form
};

/// The alpha's at x in [c2, b]. q(c1), q(c2), q'(c2) follow the side
/// convention; q and its derivatives at x are taken from the last piece.
inline AlphaValues alpha_at(const ValidatedProblem& p, const QIntegrals& Q, double x,
                            SideConvention conv = SideConvention::left) {
    if (!(x >= p.c2() && x <= p.b())) throw DomainError("alpha coefficients need x in [c2, b]");
    const double Q1 = Q.Q1, Q2 = Q.Q2;
    const double Q3 = x == p.b() ? Q.Q3b : Q.Q3_at(x);
    const double qx = q_eval(p, x, Side::right);
    const double dqx = q_derivative(p, x, Side::right);
    const double d2qx = q_second_derivative(p, x, Side::right);
    const double qa = q_eval(p, p.a(), Side::right);
    const double dqa = q_derivative(p, p.a(), Side::right);
    const double qc1 = q_with_convention(p, p.c1(), conv);
    const double qc2 = q_with_convention(p, p.c2(), conv);
    const double dqc2 = q_with_convention(p, p.c2(), conv, &q_derivative);

    AlphaValues v;
    v.alpha1 = 0.5 * (Q1 + Q2 + Q3);
    v.alpha2 = 0.25 * (qx - qa - Q1 * Q2 - Q3 * (Q1 + Q2));
    v.alpha3 = 0.125 * (qx * (Q1 + Q2) - dqx - dqa - qa * Q2 + qc1 * (Q1 + Q2) - Q3 * (qa + Q1 * Q2));
    v.alpha4 = 0.25 * (qc2 * Q1 - dqc2) + 0.125 * qc2 * (Q3 + Q2);
    v.alpha1_prime = 0.5 * qx;
    v.alpha3_prime = 0.125 * (dqx * (Q1 + Q2) - d2qx - qx * (qa + Q1 * Q2));
    v.alpha4_prime = 0.125 * qc2 * qx;
    return v;
}

inline AsymptoticCoefficients alpha_coefficients(const ValidatedProblem& p,
                                                 SideConvention conv = SideConvention::left) {
    AsymptoticCoefficients c;
    c.Q = compute_Q(p);
    c.side_convention = conv;
    const auto v = alpha_at(p, c.Q, p.b(), conv);
    c.alpha1_b = v.alpha1;
    c.alpha2_b = v.alpha2;
    c.alpha3_b = v.alpha3;
    c.alpha4_b = v.alpha4;
    c.alpha1_prime_b = v.alpha1_prime;
    c.K = 2.0 * (1.0 + c.alpha1_b) / p.length();
    return c;
}

inline double compute_K(const ValidatedProblem& p) {
    const auto Q = compute_Q(p);
    return 2.0 * (1.0 + 0.5 * (Q.Q1 + Q.Q2 + Q.Q3b)) / p.length();
}

/// Truncated large-s expansions of phi_3(x) and phi_3'(x) for x in (c2, b].
inline std::pair<double, double> phi3_asymptotic(const ValidatedProblem& p, double x, double s,
                                                 SideConvention conv = SideConvention::left) {
    if (!(x > p.c2() && x <= p.b())) throw DomainError("phi3_asymptotic needs x in (c2, b]");
    if (!(s >= 1.0)) throw SmallSError("phi3_asymptotic needs s >= 1");
    const auto v = alpha_at(p, compute_Q(p), x, conv);
    const double g = p.gamma();
    const double S = std::sin(s * (x - p.a())), C = std::cos(s * (x - p.a()));
    const double S2 = std::sin(s * (x - 2.0 * p.c2() + p.a())), C2 = std::cos(s * (x - 2.0 * p.c2() + p.a()));
    const double phi = C / g + v.alpha1 / (s * g) * S + v.alpha2 / (s * s * g) * C +
                       (v.alpha3 * S + v.alpha4 * S2) / (s * s * s * g);
    const double dphi = -s / g * S + v.alpha1 / g * C + (v.alpha1_prime - v.alpha2) / (s * g) * S +
                        ((v.alpha3 + v.alpha3_prime) * C + v.alpha4 * C2) / (s * s * g) +
                        (v.alpha3_prime * S + v.alpha4_prime * S2) / (s * s * s * g);
    return {phi, dphi};
}

/// Large-s form of omega through the 1/s term.
inline double omega_asymptotic(const ValidatedProblem& p, double s, const AsymptoticCoefficients& c) {
    if (!(s > 1.0)) throw SmallSError("omega_asymptotic needs s > 1");
    const double L = p.length();
    const double h = p.h();
    const double S = std::sin(s * L), C = std::cos(s * L);
    const double S2 = std::sin(s * (p.b() - 2.0 * p.c2() + p.a()));
    return (s * s * C + s * (1.0 + c.alpha1_b) * S + (c.alpha2_b - c.alpha1_b - h) * C +
            ((c.alpha3_b - h * c.alpha1_b + c.alpha2_b - c.alpha1_prime_b) * S + c.alpha4_b * S2) / s) /
           p.gamma();
}

inline double omega_asymptotic(const ValidatedProblem& p, double s, SideConvention conv = SideConvention::left) {
    return omega_asymptotic(p, s, alpha_coefficients(p, conv));
}

inline EigenAsymptotic eig_asymptotic(long n, double length, double alpha1_b) {
    if (n < 0) throw IndexError("eigenvalue index must be >= 0");
    const double m = (static_cast<double>(n) - 0.5) * std::numbers::pi;
    const double mu = m / length;
    EigenAsymptotic e;
    e.lambda = mu * mu + 2.0 * (1.0 + alpha1_b) / length;
    if (n >= 1) e.s = mu + (1.0 + alpha1_b) / m;
    return e;
}

/// s_n and lambda_n from the eigenvalue asymptotics, O-terms dropped.
inline EigenAsymptotic eig_asymptotic(const ValidatedProblem& p, long n) {
    const auto Q = compute_Q(p);
    return eig_asymptotic(n, p.length(), 0.5 * (Q.Q1 + Q.Q2 + Q.Q3b));
}

} // namespace sltrace
