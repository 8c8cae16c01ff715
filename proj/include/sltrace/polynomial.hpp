#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sltrace {

/// Dense polynomial in the global coordinate, coefficients in ascending degree.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }

    [[nodiscard]] std::span<const double> coeffs() const noexcept { return c_; }

    /// Degree of the trimmed polynomial; the zero polynomial has degree 0.
    [[nodiscard]] std::size_t degree() const noexcept { return c_.empty() ? 0 : c_.size() - 1; }

    [[nodiscard]] bool is_zero() const noexcept { return c_.empty(); }

    [[nodiscard]] double operator()(double x) const noexcept {
        double acc = 0.0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
        return acc;
    }

    [[nodiscard]] Polynomial derivative() const {
        if (c_.size() <= 1) return Polynomial{};
        std::vector<double> d(c_.size() - 1);
        for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
        return Polynomial{std::move(d)};
    }

    /// Antiderivative with zero constant term.
    [[nodiscard]] Polynomial antiderivative() const {
        std::vector<double> p(c_.size() + 1, 0.0);
        for (std::size_t k = 0; k < c_.size(); ++k) p[k + 1] = c_[k] / static_cast<double>(k + 1);
        return Polynomial{std::move(p)};
    }

    /// Exact definite integral over [x0, x1] through the antiderivative.
    [[nodiscard]] double integral(double x0, double x1) const {
        if (x0 == x1) return 0.0;
        const Polynomial P = antiderivative();
        return P(x1) - P(x0);
    }

    friend bool operator==(const Polynomial&, const Polynomial&) = default;

private:
    void trim() {
        while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
    }

    std::vector<double> c_;
};

} // namespace sltrace
