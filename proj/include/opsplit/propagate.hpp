#pragma once

// Exponential propagators for c' = M c and c' = M c + g(t).

#include <cmath>
#include <cstddef>
#include <vector>

#include "opsplit/errors.hpp"
#include "opsplit/linalg.hpp"
#include "opsplit/quadrature.hpp"

namespace opsplit {

// exp(tau M) c0
inline Vector propagate_homogeneous(const Matrix& m, const Vector& c0, double tau) {
    require_square(m, "propagate_homogeneous");
    if (m.rows() != c0.size()) throw DimensionError("propagate_homogeneous: state length");
    if (!(tau >= 0.0)) throw DomainError("propagate_homogeneous: negative duration");
    if (tau == 0.0) return c0;
    return expm(tau * m) * c0;
}

// Variation of constants:
//   exp((t1 - t0) M) c0 + int_{t0}^{t1} exp((t1 - s) M) g(s) ds
// with the integral taken by the composite rule on `panels` panels. The
// nodes are equispaced, so only exp(h M) for the node spacing h is formed
// and the sum is accumulated Horner-style.
template <class G>
Vector propagate_affine(const Matrix& m, G&& g, const Vector& c0, double t0, double t1,
                        const QuadratureRule& rule, int panels) {
    require_square(m, "propagate_affine");
    if (m.rows() != c0.size()) throw DimensionError("propagate_affine: state length");
    detail::check_interval(t0, t1, panels, "propagate_affine");

    const std::vector<double> w = composite_weights(rule, panels);
    const std::size_t intervals = w.size() - 1;
    const double span = t1 - t0;
    const double h = span / static_cast<double>(intervals);
    const Matrix step = expm(h * m);

    auto source = [&](std::size_t k) {
        const double s = (k == intervals) ? t1 : t0 + static_cast<double>(k) * h;
        Vector gs = g(s);
        if (gs.size() != c0.size()) throw DimensionError("propagate_affine: source length");
        return gs;
    };

    Vector acc = c0;
    acc.axpy(span * w[0], source(0));
    for (std::size_t k = 1; k <= intervals; ++k) {
        acc = step * acc;
        acc.axpy(span * w[k], source(k));
    }
    return acc;
}

// Closed form for a constant source b:
//   exp(tau M) c0 + tau phi_1(tau M) b,
// read off from exp(tau [M b; 0 0]).
inline Vector propagate_affine_exact(const Matrix& m, const Vector& b, const Vector& c0,
                                     double tau) {
    require_square(m, "propagate_affine_exact");
    const std::size_t n = m.rows();
    if (b.size() != n || c0.size() != n) {
        throw DimensionError("propagate_affine_exact: vector lengths");
    }
    if (!(tau >= 0.0)) throw DomainError("propagate_affine_exact: negative duration");
    Matrix aug(n + 1, n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug(i, j) = m(i, j);
        aug(i, n) = b[i];
    }
    const Matrix e = expm(tau * aug);
    Vector out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = e(i, n);
        for (std::size_t j = 0; j < n; ++j) s += e(i, j) * c0[j];
        out[i] = s;
    }
    return out;
}

} // namespace opsplit
