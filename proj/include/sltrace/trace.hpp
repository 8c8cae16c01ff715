#pragma once

// Regularized first trace: partial sums of lambda_n - mu_n^2 - K, a fitted
// tail, and the closed-form right-hand side it is compared against.

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/polygamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "sltrace/asymptotics.hpp"
#include "sltrace/errors.hpp"
#include "sltrace/problem.hpp"
#include "sltrace/spectrum.hpp"

namespace sltrace {

/// theorem: regularized terms from n = 0.
/// series31: lambda_0 bare, regularized terms from n = 1.
enum class TraceConvention { theorem, series31 };

inline std::string to_string(TraceConvention c) { return c == TraceConvention::theorem ? "theorem" : "series31"; }

struct TailEstimate {
    double tail = 0.0;
    double uncertainty = 0.0;
    double A = 0.0;
    double B = 0.0;
};

struct TraceReport {
    TraceConvention convention = TraceConvention::theorem;
    long n_terms = 0;
    double partial_sum = 0.0;
    double tail_estimate = 0.0;
    double tail_uncertainty = 0.0;
    double total = 0.0;
    double closed_form_rhs = 0.0;
    double deviation = 0.0;
    double stability = 0.0;
    std::vector<std::pair<long, double>> per_term_table;
    std::vector<std::string> diagnostics;
};

struct SplitSensitivity {
    double c1 = 0.0;
    double c2 = 0.0;
    double rhs = 0.0;
};

namespace detail {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
        sum_ = t;
    }
    [[nodiscard]] double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double regularized_term(double lambda, long n, double length, double K) {
    const double mu = (static_cast<double>(n) - 0.5) * std::numbers::pi / length;
    return lambda - mu * mu - K;
}

inline void require_consecutive(const std::vector<EigenvalueRecord>& records) {
    for (std::size_t i = 0; i < records.size(); ++i)
        if (records[i].n != static_cast<long>(i))
            throw IndexGap("records must be indexed 0, 1, 2, ...; found n=" + std::to_string(records[i].n) +
                           " at position " + std::to_string(i));
}

inline double closed_form(double h, double length, double qa, double qb, double Q1, double Q2, double Q3) {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    return h - 0.5 - 2.0 / length - pi2 / (4.0 * length * length) - 0.25 * (qb - qa) - (Q1 + Q2 + Q3) / length -
           0.125 * (Q1 * Q1 + Q2 * Q2 + Q3 * Q3);
}

} // namespace detail

/// lambda_n - ((n - 1/2) pi / (b - a))^2 - K.
inline double trace_term(const ValidatedProblem& p, const EigenvalueRecord& r) {
    return detail::regularized_term(r.lambda, r.n, p.length(), compute_K(p));
}

/// Running sums in ascending n under the given convention.
inline std::vector<double> partial_sums(const ValidatedProblem& p, const std::vector<EigenvalueRecord>& records,
                                        TraceConvention conv) {
    detail::require_consecutive(records);
    const double K = compute_K(p);
    std::vector<double> out;
    out.reserve(records.size());
    detail::CompensatedSum acc;
    for (const auto& r : records) {
        const bool bare = conv == TraceConvention::series31 && r.n == 0;
        acc.add(bare ? r.lambda : detail::regularized_term(r.lambda, r.n, p.length(), K));
        out.push_back(acc.value());
    }
    return out;
}

/// Fits t_n ~ A/(n - 1/2)^2 + B/(n - 1/2)^3 on the top half of the indices and
/// sums the model over all n beyond the last index.
inline TailEstimate tail_extrapolate(const std::vector<std::pair<long, double>>& terms) {
    if (terms.size() < 32) throw FitFailure("tail fit needs at least 32 terms");
    const long last = terms.back().first;
    const long first_fit = terms.front().first + (last - terms.front().first + 1) / 2;

    double s22 = 0.0, s23 = 0.0, s33 = 0.0, s2t = 0.0, s3t = 0.0;
    std::vector<std::array<double, 3>> window;
    for (const auto& [n, t] : terms) {
        if (n < first_fit) continue;
        const double m = static_cast<double>(n) - 0.5;
        if (m <= 0.0) throw FitFailure("tail window contains n <= 0");
        const double x2 = 1.0 / (m * m);
        const double x3 = x2 / m;
        s22 += x2 * x2;
        s23 += x2 * x3;
        s33 += x3 * x3;
        s2t += x2 * t;
        s3t += x3 * t;
        window.push_back({x2, x3, t});
    }
    const double det = s22 * s33 - s23 * s23;
    if (window.size() < 2 || !(std::abs(det) > 1e-300) || !(std::abs(det) > 1e-14 * s22 * s33))
        throw FitFailure("degenerate tail window");

    TailEstimate e;
    e.A = (s2t * s33 - s3t * s23) / det;
    e.B = (s22 * s3t - s23 * s2t) / det;
    double max_residual = 0.0;
    for (const auto& w : window) max_residual = std::max(max_residual, std::abs(e.A * w[0] + e.B * w[1] - w[2]));

    // sum_{n > last} 1/(n - 1/2)^k = zeta(k, last + 1/2)
    const double x = static_cast<double>(last) + 0.5;
    const double zeta2 = boost::math::trigamma(x);
    const double zeta3 = -0.5 * boost::math::polygamma(2, x);
    const double b_term = e.B * zeta3;
    e.tail = e.A * zeta2 + b_term;
    e.uncertainty = std::max(max_residual * static_cast<double>(window.size()), std::abs(b_term));
    return e;
}

/// h - 1/2 - 2/L - pi^2/(4L^2) - (q(b) - q(a))/4 - (Q1 + Q2 + Q3)/L - (Q1^2 + Q2^2 + Q3^2)/8.
inline double trace_closed_form(const ValidatedProblem& p) {
    const auto Q = compute_Q(p);
    return detail::closed_form(p.h(), p.length(), q_eval(p, p.a(), Side::right), q_eval(p, p.b(), Side::left), Q.Q1,
                               Q.Q2, Q.Q3b);
}

/// The same right-hand side with the Q-integrals taken over [a, c1'],
/// [c1', c2'], [c2', b]. Needs a globally defined polynomial q.
inline double trace_closed_form_splits(const ValidatedProblem& p, double c1p, double c2p) {
    if (!p.is_global()) throw DomainError("split re-evaluation needs a globally defined polynomial q");
    if (!(p.a() <= c1p && c1p <= c2p && c2p <= p.b())) throw DomainError("need a <= c1' <= c2' <= b");
    const auto& q = p.polynomial(1);
    return detail::closed_form(p.h(), p.length(), q(p.a()), q(p.b()), q.integral(p.a(), c1p), q.integral(c1p, c2p),
                               q.integral(c2p, p.b()));
}

/// 5 x 5 grid c1' in a + L {0.1 .. 0.5}, c2' in a + L {0.5 .. 0.9}.
inline std::vector<SplitSensitivity> splits_sensitivity(const ValidatedProblem& p) {
    std::vector<SplitSensitivity> out;
    const double L = p.length();
    for (int i = 1; i <= 5; ++i) {
        for (int j = 5; j <= 9; ++j) {
            const double c1 = p.a() + L * i / 10.0;
            const double c2 = p.a() + L * j / 10.0;
            out.push_back({c1, c2, trace_closed_form_splits(p, c1, c2)});
        }
    }
    return out;
}

/// Trace report from an already computed, certified spectrum.
inline TraceReport trace_report_from(const ValidatedProblem& p, const std::vector<EigenvalueRecord>& records,
                                     TraceConvention conv) {
    detail::require_consecutive(records);
    const long N = static_cast<long>(records.size());
    if (N < 64) throw DomainError("trace needs at least 64 terms");
    const double K = compute_K(p);

    auto evaluate = [&](long count, TraceReport* full) {
        std::vector<EigenvalueRecord> head(records.begin(), records.begin() + count);
        const auto sums = partial_sums(p, head, conv);
        std::vector<std::pair<long, double>> regularized;
        for (const auto& r : head) regularized.emplace_back(r.n, detail::regularized_term(r.lambda, r.n, p.length(), K));
        const auto tail = tail_extrapolate(regularized);
        if (full) {
            full->partial_sum = sums.back();
            full->tail_estimate = tail.tail;
            full->tail_uncertainty = tail.uncertainty;
            for (const auto& r : head) {
                const bool bare = conv == TraceConvention::series31 && r.n == 0;
                full->per_term_table.emplace_back(r.n, bare ? r.lambda
                                                            : detail::regularized_term(r.lambda, r.n, p.length(), K));
            }
        }
        return sums.back() + tail.tail;
    };

    TraceReport rep;
    rep.convention = conv;
    rep.n_terms = N;
    rep.total = evaluate(N, &rep);
    rep.total = rep.partial_sum + rep.tail_estimate;
    rep.closed_form_rhs = trace_closed_form(p);
    rep.deviation = rep.total - rep.closed_form_rhs;
    rep.stability = std::abs(rep.total - evaluate(N / 2, nullptr));
    if (rep.stability > 10.0 * rep.tail_uncertainty)
        rep.diagnostics.push_back("StabilityWarning: |total(N) - total(N/2)| exceeds 10x the tail uncertainty");
    return rep;
}

inline TraceReport trace_report(const ValidatedProblem& p, long n_terms, TraceConvention conv,
                                const SpectrumOptions& opts = {}) {
    if (n_terms < 64) throw DomainError("n_terms must be >= 64");
    const auto spec = compute_spectrum(p, n_terms, opts);
    require_certified(spec);
    auto rep = trace_report_from(p, spec.records, conv);
    rep.diagnostics.insert(rep.diagnostics.begin(), spec.diagnostics.begin(), spec.diagnostics.end());
    return rep;
}

} // namespace sltrace
