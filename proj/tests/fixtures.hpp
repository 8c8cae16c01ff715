#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sltrace/problem.hpp"

namespace fixtures {

/// [0,1] with c1 = 0.3, c2 = 0.7, delta = 2, gamma = 3, h = 0.
inline sltrace::ProblemSpec p0(std::vector<double> q = {0.0}, double h = 0.0) {
    sltrace::ProblemSpec s;
    s.a = 0.0;
    s.b = 1.0;
    s.c1 = 0.3;
    s.c2 = 0.7;
    s.delta = 2.0;
    s.gamma = 3.0;
    s.h = h;
    s.potential = sltrace::PotentialSpec::global(std::move(q));
    return s;
}

inline sltrace::ValidatedProblem p0_problem(std::vector<double> q = {0.0}, double h = 0.0) {
    return sltrace::validate_problem(p0(std::move(q), h));
}

/// Unit interval, q = 0, no transmission scaling.
inline sltrace::ValidatedProblem plain_qzero(double h) {
    auto s = p0({0.0}, h);
    s.delta = 1.0;
    s.gamma = 1.0;
    return sltrace::validate_problem(s);
}

inline double relerr(double x, double ref) { return std::abs(x - ref) / std::max(1.0, std::abs(ref)); }

inline std::string config_path(const std::string& name) { return std::string(SLTRACE_CONFIG_DIR) + "/" + name; }

} // namespace fixtures
