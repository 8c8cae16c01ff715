#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "sltrace/reference.hpp"
#include "sltrace/trace.hpp"

using namespace sltrace;

namespace {

std::vector<EigenvalueRecord> oracle_records(double h, long count) {
    std::vector<EigenvalueRecord> out;
    for (const auto& r : oracle_eigs_qzero(1.0, h, count)) {
        EigenvalueRecord e;
        e.n = r.n;
        e.lambda = r.lambda;
        e.certified = true;
        out.push_back(e);
    }
    return out;
}

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

} // namespace

TEST(TraceTerm, QZeroFirstTerms) {
    const auto p = fixtures::plain_qzero(0.0);
    const auto rec = oracle_records(0.0, 3);
    EXPECT_NEAR(trace_term(p, rec[0]), -kPi2 / 4.0 - 2.0, 1e-15);
    EXPECT_NEAR(trace_term(p, rec[1]), -0.35154273457781682, 1e-13);
    EXPECT_NEAR(trace_term(p, rec[2]), -0.067267872005500105, 1e-12);
}

TEST(PartialSums, Conventions) {
    const auto p = fixtures::plain_qzero(0.0);
    const auto rec = oracle_records(0.0, 3);
    const auto th = partial_sums(p, rec, TraceConvention::theorem);
    EXPECT_NEAR(th[0], -4.4674011002723397, 1e-14);
    EXPECT_NEAR(th[1], -4.8189438348501565, 1e-13);
    EXPECT_NEAR(th[2], -4.8862117068556566, 1e-12);
    const auto s31 = partial_sums(p, {rec[0]}, TraceConvention::series31);
    ASSERT_EQ(s31.size(), 1u);
    EXPECT_EQ(s31[0], 0.0);
}

TEST(PartialSums, ZeroTermsAndGaps) {
    const auto p = fixtures::plain_qzero(0.0);
    std::vector<EigenvalueRecord> rec(5);
    for (long n = 0; n < 5; ++n) {
        rec[n].n = n;
        rec[n].lambda = ((n - 0.5) * std::numbers::pi) * ((n - 0.5) * std::numbers::pi) + 2.0;
    }
    for (double s : partial_sums(p, rec, TraceConvention::theorem)) EXPECT_NEAR(s, 0.0, 1e-12);
    rec.erase(rec.begin() + 2);
    EXPECT_THROW(partial_sums(p, rec, TraceConvention::theorem), IndexGap);
}

TEST(TailExtrapolate, BaselProblem) {
    std::vector<std::pair<long, double>> terms;
    double partial = 0.0;
    for (long n = 1; n <= 10000; ++n) {
        terms.emplace_back(n, 1.0 / (static_cast<double>(n) * n));
        partial += 1.0 / (static_cast<double>(n) * n);
    }
    const auto t = tail_extrapolate(terms);
    EXPECT_NEAR(partial + t.tail, kPi2 / 6.0, 1e-6);
    EXPECT_LT(t.uncertainty, 1e-6);
}

TEST(TailExtrapolate, ZeroTerms) {
    std::vector<std::pair<long, double>> terms;
    for (long n = 1; n <= 64; ++n) terms.emplace_back(n, 0.0);
    const auto t = tail_extrapolate(terms);
    EXPECT_EQ(t.tail, 0.0);
    EXPECT_EQ(t.uncertainty, 0.0);
}

TEST(TailExtrapolate, NeedsEnoughTerms) {
    std::vector<std::pair<long, double>> terms;
    for (long n = 1; n <= 31; ++n) terms.emplace_back(n, 1.0);
    EXPECT_THROW(tail_extrapolate(terms), FitFailure);
}

TEST(TailExtrapolate, ExactModelIsRecovered) {
    std::vector<std::pair<long, double>> terms;
    for (long n = 1; n <= 400; ++n) {
        const double m = n - 0.5;
        terms.emplace_back(n, -1.7 / (m * m) + 0.4 / (m * m * m));
    }
    const auto t = tail_extrapolate(terms);
    EXPECT_NEAR(t.A, -1.7, 1e-10);
    EXPECT_NEAR(t.B, 0.4, 1e-8);
    double direct = 0.0;
    for (long n = 2000000; n > 400; --n) {
        const double m = n - 0.5;
        direct += -1.7 / (m * m) + 0.4 / (m * m * m);
    }
    direct += -1.7 / 1999999.5;  // integral tail beyond 2e6
    EXPECT_NEAR(t.tail, direct, 1e-9);
}

TEST(ClosedForm, ReferenceValues) {
    EXPECT_NEAR(trace_closed_form(fixtures::plain_qzero(0.0)), -4.9674011002723397, 1e-14);
    EXPECT_NEAR(trace_closed_form(fixtures::plain_qzero(0.0)), -2.5 - kPi2 / 4.0, 1e-14);
    EXPECT_NEAR(trace_closed_form(fixtures::plain_qzero(5.0)), 0.032598899727660345, 1e-14);
    EXPECT_NEAR(trace_closed_form(fixtures::p0_problem({1.0})), -6.0099011002723397, 1e-14);
    EXPECT_NEAR(trace_closed_form(fixtures::p0_problem({0.0, 1.0})), -5.7307823502723397, 1e-14);
}

TEST(ClosedForm, SplitReevaluation) {
    const auto q1 = fixtures::p0_problem({1.0});
    EXPECT_NEAR(trace_closed_form_splits(q1, 0.0, 0.0), -6.0924011002723397, 1e-14);
    EXPECT_NEAR(trace_closed_form_splits(q1, 0.3, 0.7) - trace_closed_form_splits(q1, 0.0, 0.0), 0.0825, 1e-14);
    const auto z = fixtures::p0_problem();
    EXPECT_EQ(trace_closed_form_splits(z, 0.1, 0.2), trace_closed_form_splits(z, 0.5, 0.9));
    const auto lin = fixtures::p0_problem({0.0, 1.0});
    EXPECT_EQ(trace_closed_form_splits(lin, lin.c1(), lin.c2()), trace_closed_form(lin));
    EXPECT_THROW(trace_closed_form_splits(lin, 0.8, 0.2), DomainError);
    auto s = fixtures::p0();
    s.potential = PotentialSpec::piecewise({{1.0}, {2.0}, {3.0}});
    EXPECT_THROW(trace_closed_form_splits(validate_problem(s), 0.3, 0.7), DomainError);
}

TEST(ClosedForm, SensitivityGrid) {
    const auto g = splits_sensitivity(fixtures::p0_problem({0.0, 1.0}));
    ASSERT_EQ(g.size(), 25u);
    EXPECT_NEAR(g.front().c1, 0.1, 1e-15);
    EXPECT_NEAR(g.front().c2, 0.5, 1e-15);
    EXPECT_NEAR(g.back().c1, 0.5, 1e-15);
    EXPECT_NEAR(g.back().c2, 0.9, 1e-15);
    for (const auto& e : g) EXPECT_LE(e.c1, e.c2);
}

TEST(Report, OracleSpectrumQZero) {
    const auto p = fixtures::plain_qzero(0.0);
    const auto rec = oracle_records(0.0, 2000);
    const auto th = trace_report_from(p, rec, TraceConvention::theorem);
    EXPECT_NEAR(th.total, -4.9674, 1e-3);
    EXPECT_LE(std::abs(th.deviation), 5e-3);
    EXPECT_LE(th.tail_uncertainty, 2e-3);
    EXPECT_LE(th.stability, 1e-3);
    EXPECT_EQ(th.per_term_table.size(), 2000u);
    const auto s31 = trace_report_from(p, rec, TraceConvention::series31);
    EXPECT_NEAR(th.total - s31.total, -(kPi2 / 4.0 + 2.0), 1e-12);
    EXPECT_EQ(th.tail_estimate, s31.tail_estimate);
}

TEST(Report, ShootingSpectrumSmallN) {
    const auto p = fixtures::p0_problem({0.0, 1.0});
    const auto rep = trace_report(p, 200, TraceConvention::theorem);
    EXPECT_EQ(rep.n_terms, 200);
    EXPECT_EQ(rep.total, rep.partial_sum + rep.tail_estimate);
    EXPECT_EQ(rep.deviation, rep.total - rep.closed_form_rhs);
    EXPECT_THROW(trace_report(p, 63, TraceConvention::theorem), DomainError);
}

TEST(Report, ScalarAndSplitInvariance) {
    const auto p = fixtures::p0_problem({0.0, 1.0});
    const double ref = trace_report(p, 256, TraceConvention::theorem).total;
    EXPECT_NEAR(trace_report(with_scalars(p, -1.0, 2.0), 256, TraceConvention::theorem).total, ref, 1e-7);
    EXPECT_NEAR(trace_report(with_splits(p, 0.45, 0.9), 256, TraceConvention::theorem).total, ref, 1e-7);
}
