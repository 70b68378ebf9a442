#pragma once

// Closed Newton-Cotes rules (trapezoid, Simpson, Simpson 3/8, Boole) and
// their composite application to scalar and vector integrands.

#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "opsplit/errors.hpp"
#include "opsplit/linalg.hpp"

namespace opsplit {

struct QuadratureRule {
    int degree = 1;
    std::string_view name;
    // Weights as integer numerators over a common denominator; the rule on
    // [a, b] is (b - a) / denominator * sum_i numerators[i] f(x_i) with
    // x_i = a + i (b - a) / degree.
    std::vector<long> numerators;
    long denominator = 1;
    // Exponent of (b - a) in the single-panel error term.
    int error_order = 3;

    std::size_t node_count() const noexcept { return numerators.size(); }

    // Weight of node i normalized so that the weights sum to one.
    double weight(std::size_t i) const {
        return static_cast<double>(numerators[i]) / static_cast<double>(denominator);
    }

    // Highest polynomial degree integrated exactly.
    int exactness_degree() const noexcept { return degree % 2 == 0 ? degree + 1 : degree; }

    // Nominal order of the composite rule as the panel width goes to zero.
    int composite_order() const noexcept { return error_order - 1; }
};

inline QuadratureRule rule_coefficients(int degree) {
    switch (degree) {
    case 1: return {1, "trapezoid", {1, 1}, 2, 3};
    case 2: return {2, "simpson", {1, 4, 1}, 6, 5};
    case 3: return {3, "simpson38", {1, 3, 3, 1}, 8, 5};
    case 4: return {4, "boole", {7, 32, 12, 32, 7}, 90, 7};
    default:
        throw DomainError("rule_coefficients: unsupported Newton-Cotes degree " +
                          std::to_string(degree) + " (expected 1..4)");
    }
}

inline QuadratureRule rule_by_name(std::string_view name) {
    for (int d = 1; d <= 4; ++d) {
        QuadratureRule r = rule_coefficients(d);
        if (r.name == name) return r;
    }
    throw DomainError("unknown quadrature rule '" + std::string(name) + "'");
}

namespace detail {

inline void check_interval(double a, double b, int panels, const char* who) {
    if (!std::isfinite(a) || !std::isfinite(b)) {
        throw DomainError(std::string(who) + ": non-finite interval bound");
    }
    if (b < a) throw DomainError(std::string(who) + ": upper limit below lower limit");
    if (panels < 1) throw DomainError(std::string(who) + ": panels must be >= 1");
}

} // namespace detail

// Normalized weights of the composite rule at its degree * panels + 1
// equispaced nodes. They sum to one; multiply by (b - a).
inline std::vector<double> composite_weights(const QuadratureRule& rule, int panels) {
    if (panels < 1) throw DomainError("composite_weights: panels must be >= 1");
    const std::size_t d = static_cast<std::size_t>(rule.degree);
    std::vector<double> w(d * static_cast<std::size_t>(panels) + 1, 0.0);
    for (std::size_t p = 0; p < static_cast<std::size_t>(panels); ++p)
        for (std::size_t i = 0; i <= d; ++i) w[p * d + i] += rule.weight(i) / panels;
    return w;
}

// For a panel of degree d with unit-spaced nodes 0..d, entry [j][m] is the
// integral over [j, j + 1] of the Lagrange basis polynomial of node m. Row
// j integrates the panel interpolant over one node spacing; the rows sum
// to d times the rule's normalized weights.
inline std::vector<std::vector<double>> subinterval_weights(const QuadratureRule& rule) {
    const int d = rule.degree;
    std::vector<std::vector<double>> out(d, std::vector<double>(d + 1, 0.0));
    for (int m = 0; m <= d; ++m) {
        // Coefficients of L_m(x) = prod_{k != m} (x - k) / (m - k).
        std::vector<double> poly{1.0};
        double scale = 1.0;
        for (int k = 0; k <= d; ++k) {
            if (k == m) continue;
            std::vector<double> next(poly.size() + 1, 0.0);
            for (std::size_t i = 0; i < poly.size(); ++i) {
                next[i + 1] += poly[i];
                next[i] -= k * poly[i];
            }
            poly = std::move(next);
            scale *= static_cast<double>(m - k);
        }
        for (int j = 0; j < d; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < poly.size(); ++i) {
                const double e = static_cast<double>(i + 1);
                s += poly[i] * (std::pow(j + 1.0, e) - std::pow(static_cast<double>(j), e)) / e;
            }
            out[j][m] = s / scale;
        }
    }
    return out;
}

template <class F>
double integrate(F&& f, double a, double b, const QuadratureRule& rule, int panels) {
    detail::check_interval(a, b, panels, "integrate");
    const int d = rule.degree;
    const double h = (b - a) / (static_cast<double>(panels) * d);
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        double panel = 0.0;
        for (int i = 0; i <= d; ++i) {
            const int k = p * d + i;
            const double x = (k == panels * d) ? b : a + k * h;
            panel += static_cast<double>(rule.numerators[i]) * f(x);
        }
        sum += panel;
    }
    return (b - a) / panels * sum / static_cast<double>(rule.denominator);
}

template <class F>
Vector integrate_vector(F&& f, double a, double b, const QuadratureRule& rule, int panels) {
    detail::check_interval(a, b, panels, "integrate_vector");
    const int d = rule.degree;
    const double h = (b - a) / (static_cast<double>(panels) * d);
    Vector sum;
    for (int p = 0; p < panels; ++p) {
        for (int i = 0; i <= d; ++i) {
            const int k = p * d + i;
            const double x = (k == panels * d) ? b : a + k * h;
            const Vector fx = f(x);
            if (sum.size() == 0) sum = Vector(fx.size());
            sum.axpy(static_cast<double>(rule.numerators[i]), fx);
        }
    }
    sum *= (b - a) / panels / static_cast<double>(rule.denominator);
    return sum;
}

} // namespace opsplit
