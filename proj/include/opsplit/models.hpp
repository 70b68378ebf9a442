#pragma once

// Concrete test problems: the scalar integro example c' = c + t c, the
// Newton-Cotes closures of u' = int_0^t u, and the semi-discrete 1D
// transport system with its two memory-term closures.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "opsplit/errors.hpp"
#include "opsplit/linalg.hpp"
#include "opsplit/operator.hpp"
#include "opsplit/quadrature.hpp"
#include "opsplit/schemes.hpp"
#include "opsplit/trajectory.hpp"

namespace opsplit {

// ---------------------------------------------------------------------------
// Scalar example: c' = c + t c, split as A = 1, B(t) = t.

inline double example1_exact(double t, double c0 = 1.0) {
    if (t < 0.0) throw DomainError("example1_exact: t must be >= 0");
    return std::exp(t + 0.5 * t * t) * c0;
}

inline SplitProblem example1_problem(double c0, double t_end, std::size_t n_steps) {
    Operator b = Operator::diagonal(
        1, [](double t) { return Vector{t}; },
        [](double lo, double hi) { return Vector{0.5 * (hi * hi - lo * lo)}; });
    return SplitProblem{Matrix{{1.0}}, std::move(b), Vector{c0}, TimeGrid(0.0, t_end, n_steps)};
}

// ---------------------------------------------------------------------------
// Closures of u' = int_0^t u(s) ds.

// Exact solution of the trapezoid closure u' = (t/2)(u0 + u), u(0) = u0.
inline double trapezoid_closure_exact(double t, double u0) {
    if (t < 0.0) throw DomainError("trapezoid_closure_exact: t must be >= 0");
    return (2.0 * std::exp(0.25 * t * t) - 1.0) * u0;
}

// Exact fraction with 64-bit parts; arithmetic throws on overflow.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    static Rational make(__int128 n, __int128 d) {
        if (d == 0) throw DomainError("Rational: zero denominator");
        if (d < 0) {
            n = -n;
            d = -d;
        }
        __int128 a = n < 0 ? -n : n;
        __int128 b = d;
        while (b != 0) {
            const __int128 r = a % b;
            a = b;
            b = r;
        }
        if (a > 1) {
            n /= a;
            d /= a;
        }
        constexpr __int128 lim = std::numeric_limits<std::int64_t>::max();
        if (n > lim || -n > lim || d > lim) throw DomainError("Rational: overflow");
        return {static_cast<std::int64_t>(n), static_cast<std::int64_t>(d)};
    }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    friend Rational operator+(Rational a, Rational b) {
        return make(static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den,
                    static_cast<__int128>(a.den) * b.den);
    }
    friend Rational operator*(Rational a, Rational b) {
        return make(static_cast<__int128>(a.num) * b.num, static_cast<__int128>(a.den) * b.den);
    }
    friend Rational operator/(Rational a, Rational b) {
        return make(static_cast<__int128>(a.num) * b.den, static_cast<__int128>(a.den) * b.num);
    }
    friend bool operator==(const Rational&, const Rational&) = default;
};

// Power-series coefficients a_0..a_{n_terms}, as multiples of u0, of the
// Simpson closure u' = (t/6)(u(0) + 4 u(t/2) + u(t)). Matching the t^k
// coefficients gives a_1 = 0 and
//   (k + 1) a_{k+1} = ([k == 1] a_0 + (1 + 2^{3-k}) a_{k-1}) / 6.
inline std::vector<Rational> simpson_closure_series_exact(int n_terms) {
    if (n_terms < 2) throw DomainError("simpson_closure_series: n_terms must be >= 2");
    std::vector<Rational> a(static_cast<std::size_t>(n_terms) + 1, Rational{0, 1});
    a[0] = {1, 1};
    for (int k = 1; k < n_terms; ++k) {
        // 1 + 2^{3-k} = (2^{k-3} + 1) / 2^{k-3} for k >= 3.
        Rational factor = k <= 3 ? Rational::make((1 << (3 - k)) + 1, 1)
                                 : Rational::make((static_cast<__int128>(1) << (k - 3)) + 1,
                                                  static_cast<__int128>(1) << (k - 3));
        Rational rhs = factor * a[static_cast<std::size_t>(k - 1)];
        if (k == 1) rhs = rhs + a[0];
        a[static_cast<std::size_t>(k + 1)] = rhs / Rational::make(6 * (k + 1), 1);
    }
    return a;
}

inline std::vector<double> simpson_closure_series(double u0, int n_terms) {
    std::vector<double> out;
    for (const Rational& r : simpson_closure_series_exact(n_terms)) out.push_back(r.value() * u0);
    return out;
}

inline double evaluate_series(const std::vector<double>& coeffs, double t) {
    double s = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) s = s * t + *it;
    return s;
}

// ---------------------------------------------------------------------------
// 1D transport with absorption and a memory source:
//   dC/dt = (A - Lambda_1 + Lambda_2) C

// Sign convention of the advection-diffusion matrix.
enum class TransportSigns {
    // The printed matrices: (D/dx^2) tridiag(1,-2,1) + (v/dx) bidiag(-1, 1).
    displayed,
    // The advection part negated, -(v/dx) bidiag(-1, 1): first-order upwind
    // for v > 0 flowing toward increasing x.
    upwind,
};

struct TransportConfig {
    double v = 1.0;
    double diffusion = 0.01;
    double lambda1 = 0.1;
    double lambda2 = 0.05;
    std::size_t n_points = 100;
    double domain_length = 1.0;
    TransportSigns signs = TransportSigns::displayed;

    double dx() const { return domain_length / static_cast<double>(n_points); }

    void validate() const {
        for (double x : {v, diffusion, lambda1, lambda2, domain_length}) {
            if (!std::isfinite(x)) throw DomainError("TransportConfig: non-finite parameter");
        }
        if (n_points < 3) throw DomainError("TransportConfig: n_points must be >= 3");
        if (!(domain_length > 0.0)) throw DomainError("TransportConfig: domain_length must be > 0");
        if (diffusion < 0.0) throw DomainError("TransportConfig: diffusion must be >= 0");
    }
};

struct TransportMatrices {
    Matrix a;
    Matrix lambda1;
};

inline TransportMatrices build_transport_matrices(const TransportConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.n_points;
    const double dx = cfg.dx();
    const double diff = cfg.diffusion / (dx * dx);
    const double adv = (cfg.signs == TransportSigns::displayed ? 1.0 : -1.0) * cfg.v / dx;
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        a(i, i) = -2.0 * diff + adv;
        if (i > 0) a(i, i - 1) = diff - adv;
        if (i + 1 < n) a(i, i + 1) = diff;
    }
    return {std::move(a), cfg.lambda1 * Matrix::identity(n)};
}

// Cell-centre coordinates x_i = (i + 1/2) dx.
inline std::vector<double> transport_nodes(const TransportConfig& cfg) {
    std::vector<double> x(cfg.n_points);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = (static_cast<double>(i) + 0.5) * cfg.dx();
    return x;
}

// Gaussian bump exp(-100 (x - L/2)^2).
inline Vector transport_initial_state(const TransportConfig& cfg) {
    const std::vector<double> x = transport_nodes(cfg);
    const double mid = 0.5 * cfg.domain_length;
    Vector c(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) c[i] = std::exp(-100.0 * (x[i] - mid) * (x[i] - mid));
    return c;
}

// Case 1, int_0^t lambda2 c ds ~ lambda2 t c(t): B(t) = (-lambda1 + lambda2 t) I,
// whose flow over [0, t] is exp((-lambda1 t + lambda2 t^2 / 2) I).
inline Operator memory_case1_B(const TransportConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.n_points;
    const double l1 = cfg.lambda1;
    const double l2 = cfg.lambda2;
    return Operator::diagonal(
        n, [n, l1, l2](double t) { return Vector(n, -l1 + l2 * t); },
        [n, l1, l2](double lo, double hi) {
            return Vector(n, -l1 * (hi - lo) + 0.5 * l2 * (hi * hi - lo * lo));
        });
}

// Case 2: B(C) = Lambda_2(C_{i-1}) - Lambda_1 C, where the j-th diagonal
// entry of Lambda_2 is int_{t^n}^t lambda2 c_{j,i-1}(s) ds over the
// previous iterate's history, restarted at the start of the history.
class Case2Source {
public:
    Case2Source(NodalTrajectory history, double lambda1, double lambda2, QuadratureRule quad,
                int panels)
        : history_(std::move(history)), lambda1_(lambda1), lambda2_(lambda2),
          quad_(std::move(quad)), panels_(panels) {}

    // lambda2 int_{t_begin}^t c_{i-1}(s) ds
    Vector memory(double t) const {
        if (!history_.covers(history_.t_begin(), t)) {
            throw DomainError("memory_case2_B: history does not cover [" +
                              std::to_string(history_.t_begin()) + ", " + std::to_string(t) + "]");
        }
        if (t <= history_.t_begin()) return Vector(history_.node(0).size());
        Vector m = integrate_vector([this](double s) { return history_.at(s); },
                                    history_.t_begin(), t, quad_, panels_);
        m *= lambda2_;
        return m;
    }

    // B(C) applied to the current state c at time t.
    Vector apply(double t, const Vector& c) const {
        Vector out = memory(t);
        out.axpy(-lambda1_, c);
        return out;
    }

private:
    NodalTrajectory history_;
    double lambda1_;
    double lambda2_;
    QuadratureRule quad_;
    int panels_;
};

inline Case2Source memory_case2_B(const NodalTrajectory& history, const TransportConfig& cfg,
                                  const QuadratureRule& quad, int panels = 8) {
    cfg.validate();
    if (panels < 1) throw DomainError("memory_case2_B: panels must be >= 1");
    if (history.node(0).size() != cfg.n_points) {
        throw DimensionError("memory_case2_B: history state length");
    }
    return Case2Source(history, cfg.lambda1, cfg.lambda2, quad, panels);
}

enum class MemoryKind { case1_moment, case2_history };

inline std::string_view to_string(MemoryKind k) {
    return k == MemoryKind::case1_moment ? "case1" : "case2";
}

inline MemoryKind parse_memory_kind(std::string_view s) {
    if (s == "case1" || s == "case1_moment") return MemoryKind::case1_moment;
    if (s == "case2" || s == "case2_history") return MemoryKind::case2_history;
    throw DomainError("unknown memory closure '" + std::string(s) + "'");
}

struct MemoryClosure {
    MemoryKind kind = MemoryKind::case1_moment;
    QuadratureRule history_quad = rule_coefficients(2);
    int history_panels = 8;
};

// Split problem for the transport system. Case 1 puts the whole
// absorption/memory term into B(t); Case 2 keeps B = -Lambda_1 and feeds the
// memory integral of the previous iterate in as a history source, so only
// the iterative scheme accepts it.
inline SplitProblem transport_problem(const TransportConfig& cfg, const MemoryClosure& closure,
                                      const TimeGrid& grid, Vector c0) {
    TransportMatrices mats = build_transport_matrices(cfg);
    if (c0.size() != cfg.n_points) throw DimensionError("transport_problem: c0 length");
    if (closure.kind == MemoryKind::case1_moment) {
        return SplitProblem{std::move(mats.a), memory_case1_B(cfg), std::move(c0), grid};
    }
    HistorySource memory = [cfg, closure](const NodalTrajectory& previous, double t) {
        return memory_case2_B(previous, cfg, closure.history_quad, closure.history_panels)
            .memory(t);
    };
    return SplitProblem{std::move(mats.a), -1.0 * mats.lambda1, std::move(c0), grid,
                        std::move(memory)};
}

// Unsplit fine-step reference: classical RK4 at grid.step() / refinement on
// the same spatial grid. Case 1 uses B(t) = (-lambda1 + lambda2 t) I; Case 2
// carries the running integral w' = lambda2 c from t = 0 as extra state.
// The trajectory is sampled at the grid times.
inline Trajectory reference_solution(const TransportConfig& cfg, const MemoryClosure& closure,
                                     const TimeGrid& grid, const Vector& c0, int refinement) {
    if (refinement < 4) throw DomainError("reference_solution: refinement must be >= 4");
    const TransportMatrices mats = build_transport_matrices(cfg);
    const std::size_t n = cfg.n_points;
    if (c0.size() != n) throw DimensionError("reference_solution: c0 length");
    const bool case2 = closure.kind == MemoryKind::case2_history;
    const double l1 = cfg.lambda1;
    const double l2 = cfg.lambda2;

    auto rhs = [&](double t, const Vector& y) {
        Vector out(y.size());
        Vector c(std::vector<double>(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n)));
        Vector ac = mats.a * c;
        for (std::size_t i = 0; i < n; ++i) {
            if (case2) {
                out[i] = ac[i] - l1 * c[i] + y[n + i];
                out[n + i] = l2 * c[i];
            } else {
                out[i] = ac[i] + (-l1 + l2 * t) * c[i];
            }
        }
        return out;
    };

    Vector y(case2 ? 2 * n : n);
    for (std::size_t i = 0; i < n; ++i) y[i] = c0[i];

    Trajectory out;
    out.push_back({grid.t0(), c0, 0, true});
    const double h = grid.step() / refinement;
    for (std::size_t step = 0; step < grid.n_steps(); ++step) {
        const double t_step = grid.time(step);
        for (int s = 0; s < refinement; ++s) {
            const double t = t_step + s * h;
            const Vector k1 = rhs(t, y);
            const Vector k2 = rhs(t + 0.5 * h, y + (0.5 * h) * k1);
            const Vector k3 = rhs(t + 0.5 * h, y + (0.5 * h) * k2);
            const Vector k4 = rhs(t + h, y + h * k3);
            y.axpy(h / 6.0, k1);
            y.axpy(h / 3.0, k2);
            y.axpy(h / 3.0, k3);
            y.axpy(h / 6.0, k4);
        }
        if (!y.all_finite() || norm_inf(y) > detail::divergence_threshold) {
            throw DivergenceError("reference solution blew up near t = " +
                                  std::to_string(grid.time(step + 1)) +
                                  "; use a smaller dt or a larger refinement");
        }
        Vector c(std::vector<double>(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n)));
        out.push_back({grid.time(step + 1), std::move(c), 0, true});
    }
    return out;
}

} // namespace opsplit
