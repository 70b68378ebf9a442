#pragma once

// Splitting integrators for c' = A c + B(t) c: sequential (Lie), symmetrically
// weighted sequential (SWSS), Strang-Marchuk, and iterative splitting, plus
// the sequential splitting of a nonlinear right-hand side F1 + F2.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "opsplit/errors.hpp"
#include "opsplit/linalg.hpp"
#include "opsplit/operator.hpp"
#include "opsplit/quadrature.hpp"
#include "opsplit/trajectory.hpp"

namespace opsplit {

// Extra source term driven by the previous iterate's history inside the
// current step, e.g. a memory integral int_{t^n}^t lambda c_{i-1}(s) ds.
// Only the iterative scheme can honour it.
using HistorySource = std::function<Vector(const NodalTrajectory& previous, double t)>;

struct SplitProblem {
    Operator a;
    Operator b;
    Vector c0;
    TimeGrid grid;
    HistorySource memory = {};

    void validate() const {
        if (a.size() != b.size()) throw DimensionError("SplitProblem: A and B sizes differ");
        if (c0.size() != a.size()) throw DimensionError("SplitProblem: c0 length");
    }
};

struct NonlinearSplitProblem {
    using Rhs = std::function<Vector(double, const Vector&)>;
    Rhs f1;
    Rhs f2;
    Vector c0;
    TimeGrid grid;
};

enum class IterationMode { one_sided_a, one_sided_b, alternating };

inline std::string_view to_string(IterationMode m) {
    switch (m) {
    case IterationMode::one_sided_a: return "one-sided-a";
    case IterationMode::one_sided_b: return "one-sided-b";
    case IterationMode::alternating: return "alternating";
    }
    return "?";
}

inline IterationMode parse_iteration_mode(std::string_view s) {
    if (s == "one-sided-a" || s == "one_sided_a") return IterationMode::one_sided_a;
    if (s == "one-sided-b" || s == "one_sided_b") return IterationMode::one_sided_b;
    if (s == "alternating") return IterationMode::alternating;
    throw DomainError("unknown iteration mode '" + std::string(s) + "'");
}

struct IterativeConfig {
    int max_iters = 8;
    double eps = 1e-12;
    IterationMode mode = IterationMode::alternating;
    QuadratureRule history_quad = rule_coefficients(2);
    int history_panels = 8;
    // Evaluate the previous iterate at t^{n+1} - (s - t^n) instead of s.
    bool reverse_history = false;

    void validate() const {
        if (max_iters < 1) throw DomainError("IterativeConfig: max_iters must be >= 1");
        if (!(eps > 0.0)) throw DomainError("IterativeConfig: eps must be positive");
        if (history_panels < 1) throw DomainError("IterativeConfig: history_panels must be >= 1");
    }
};

struct IterativeResult {
    Vector state;
    int iterations = 0;
    bool converged = false;
    // c_i(t^{n+1}) for i = 1..iterations.
    std::vector<Vector> iterates;
};

enum class Scheme { lie, swss, strang, iterative };

inline std::string_view to_string(Scheme s) {
    switch (s) {
    case Scheme::lie: return "lie";
    case Scheme::swss: return "swss";
    case Scheme::strang: return "strang";
    case Scheme::iterative: return "iterative";
    }
    return "?";
}

inline Scheme parse_scheme(std::string_view s) {
    if (s == "lie") return Scheme::lie;
    if (s == "swss") return Scheme::swss;
    if (s == "strang") return Scheme::strang;
    if (s == "iterative") return Scheme::iterative;
    throw DomainError("unknown scheme '" + std::string(s) + "'");
}

// Which operator the Strang half-steps use.
enum class StrangOrder { a_half_steps, b_half_steps };

namespace detail {

constexpr double divergence_threshold = 1e12;

// Owns the flows of one problem so exponentials are formed once per run.
class Stepper {
public:
    explicit Stepper(const SplitProblem& p) : p_(&p), flow_a_(p.a), flow_b_(p.b) {
        p.validate();
    }

    Vector lie(std::size_t n, const Vector& c) {
        require_no_memory("lie");
        const double t = p_->grid.time(n);
        const double tau = p_->grid.step();
        return flow_b_.advance(t, tau, flow_a_.advance(t, tau, c));
    }

    Vector swss(std::size_t n, const Vector& c) {
        require_no_memory("swss");
        const double t = p_->grid.time(n);
        const double tau = p_->grid.step();
        Vector ab = flow_b_.advance(t, tau, flow_a_.advance(t, tau, c));
        const Vector ba = flow_a_.advance(t, tau, flow_b_.advance(t, tau, c));
        ab += ba;
        ab *= 0.5;
        return ab;
    }

    Vector strang(std::size_t n, const Vector& c, StrangOrder order = StrangOrder::a_half_steps) {
        require_no_memory("strang");
        const double t = p_->grid.time(n);
        const double tau = p_->grid.step();
        const double half = 0.5 * tau;
        ExactFlow& outer = order == StrangOrder::a_half_steps ? flow_a_ : flow_b_;
        ExactFlow& inner = order == StrangOrder::a_half_steps ? flow_b_ : flow_a_;
        Vector x = outer.advance(t, half, c);
        x = inner.advance(t, tau, x);
        return outer.advance(t + half, half, x);
    }

    IterativeResult iterative(std::size_t n, const Vector& c, const IterativeConfig& cfg) {
        cfg.validate();
        const int d = cfg.history_quad.degree;
        const std::size_t intervals = static_cast<std::size_t>(d * cfg.history_panels);
        const double tn = p_->grid.time(n);
        const double h = p_->grid.step() / static_cast<double>(intervals);
        if (sub_weights_degree_ != d) {
            sub_weights_ = subinterval_weights(cfg.history_quad);
            sub_weights_degree_ = d;
        }
        auto node_time = [&](std::size_t k) { return tn + static_cast<double>(k) * h; };

        const std::size_t dim = c.size();
        std::vector<Vector> previous(intervals + 1, Vector(dim));
        std::vector<Vector> ends;
        Vector zero(dim);
        IterativeResult result;

        for (int i = 1; i <= cfg.max_iters; ++i) {
            const bool use_a = exponentiates_a(cfg.mode, i);
            ExactFlow& flow = use_a ? flow_a_ : flow_b_;
            const Operator& other = use_a ? p_->b : p_->a;

            const NodalTrajectory history(tn, h, previous);
            std::vector<Vector> source(intervals + 1);
            for (std::size_t k = 0; k <= intervals; ++k) {
                const std::size_t src = cfg.reverse_history ? intervals - k : k;
                source[k] = other.apply(node_time(k), previous[src]);
                if (p_->memory) source[k] += p_->memory(history, node_time(k));
            }

            std::vector<Vector> current(intervals + 1);
            current[0] = c;
            for (std::size_t k = 0; k < intervals; ++k) {
                const std::size_t j = k % static_cast<std::size_t>(d);
                const std::size_t q = k - j;
                Vector next = flow.advance(node_time(k), h, current[k]);
                for (std::size_t m = 0; m <= static_cast<std::size_t>(d); ++m) {
                    const double w = h * sub_weights_[j][m];
                    const double offset = static_cast<double>(k + 1) - static_cast<double>(q + m);
                    next.axpy(w, flow.advance(node_time(q + m), offset * h, source[q + m]));
                }
                if (!next.all_finite() || norm_inf(next) > divergence_threshold) {
                    throw DivergenceError("iterative splitting: iterate " + std::to_string(i) +
                                          " diverged (norm above 1e12)");
                }
                current[k + 1] = std::move(next);
            }

            ends.push_back(current.back());
            result.iterations = i;
            if (i >= 2) {
                const Vector& two_back = i >= 3 ? ends[ends.size() - 3] : zero;
                if (norm_inf(ends.back() - two_back) < cfg.eps) {
                    result.converged = true;
                    previous = std::move(current);
                    break;
                }
            }
            previous = std::move(current);
        }
        result.state = ends.back();
        result.iterates = std::move(ends);
        return result;
    }

    static bool exponentiates_a(IterationMode mode, int iteration) {
        switch (mode) {
        case IterationMode::one_sided_a: return true;
        case IterationMode::one_sided_b: return false;
        case IterationMode::alternating: return iteration % 2 == 1;
        }
        return true;
    }

private:
    void require_no_memory(const char* scheme) const {
        if (p_->memory) {
            throw UnsupportedOperatorError(std::string(scheme) +
                                           ": history-driven source terms need the iterative scheme");
        }
    }

    const SplitProblem* p_;
    ExactFlow flow_a_;
    ExactFlow flow_b_;
    std::vector<std::vector<double>> sub_weights_;
    int sub_weights_degree_ = 0;
};

inline void check_step_index(const SplitProblem& p, std::size_t n) {
    if (n >= p.grid.n_steps()) {
        throw DomainError("step index " + std::to_string(n) + " outside grid of " +
                          std::to_string(p.grid.n_steps()) + " steps");
    }
}

} // namespace detail

// c^{n+1} = exp(tau B) exp(tau A) c^n; a time-dependent diagonal B uses
// exp(int_{t^n}^{t^{n+1}} B).
inline Vector lie_step(const SplitProblem& p, std::size_t n, const Vector& cn) {
    detail::check_step_index(p, n);
    return detail::Stepper(p).lie(n, cn);
}

inline Vector lie_step(const SplitProblem& p, std::size_t n) { return lie_step(p, n, p.c0); }

// Average of the A-then-B and B-then-A sequential results.
inline Vector swss_step(const SplitProblem& p, std::size_t n, const Vector& cn) {
    detail::check_step_index(p, n);
    return detail::Stepper(p).swss(n, cn);
}

inline Vector swss_step(const SplitProblem& p, std::size_t n) { return swss_step(p, n, p.c0); }

// Half step of A, full step of B, half step of A (or the roles swapped).
inline Vector strang_step(const SplitProblem& p, std::size_t n, const Vector& cn,
                          StrangOrder order = StrangOrder::a_half_steps) {
    detail::check_step_index(p, n);
    return detail::Stepper(p).strang(n, cn, order);
}

inline Vector strang_step(const SplitProblem& p, std::size_t n) { return strang_step(p, n, p.c0); }

// Iterative splitting on [t^n, t^{n+1}]. Iteration i solves
//   c_i' = X c_i + Y c_{i-1}(t),  c_i(t^n) = c^n,
// exactly in X and with the source by variation of constants, starting from
// c_0 = 0. X is A or B according to cfg.mode (alternating: odd i use A).
// The previous iterate is stored on the degree * panels + 1 equispaced
// nodes of cfg.history_quad; partial-panel integrals use the panel's
// interpolating polynomial so that end values coincide with the composite
// rule. Stops once ||c_i(t^{n+1}) - c_{i-2}(t^{n+1})||_inf < eps.
inline IterativeResult iterative_solve(const SplitProblem& p, const IterativeConfig& cfg,
                                       std::size_t n, const Vector& cn) {
    detail::check_step_index(p, n);
    return detail::Stepper(p).iterative(n, cn, cfg);
}

inline IterativeResult iterative_solve(const SplitProblem& p, const IterativeConfig& cfg,
                                       std::size_t n) {
    return iterative_solve(p, cfg, n, p.c0);
}

namespace detail {

template <class F>
Vector rk4_solve(F&& f, double t0, double tau, const Vector& c0, int substeps, const char* which) {
    Vector c = c0;
    const double h = tau / substeps;
    for (int s = 0; s < substeps; ++s) {
        const double t = t0 + s * h;
        const Vector k1 = f(t, c);
        const Vector k2 = f(t + 0.5 * h, c + (0.5 * h) * k1);
        const Vector k3 = f(t + 0.5 * h, c + (0.5 * h) * k2);
        const Vector k4 = f(t + h, c + h * k3);
        c.axpy(h / 6.0, k1);
        c.axpy(h / 3.0, k2);
        c.axpy(h / 3.0, k3);
        c.axpy(h / 6.0, k4);
        if (!c.all_finite()) {
            throw DivergenceError(std::string("nonlinear splitting: sub-problem ") + which +
                                  " produced a non-finite state");
        }
    }
    return c;
}

} // namespace detail

// Sequential splitting of c' = F1(t, c) + F2(t, c); each sub-problem is
// integrated with classical RK4 using `substeps` steps.
inline Vector nonlinear_lie_step(const NonlinearSplitProblem& p, std::size_t n,
                                 const Vector& cn, int substeps) {
    if (substeps < 1) throw DomainError("nonlinear_lie_step: substeps must be >= 1");
    if (n >= p.grid.n_steps()) throw DomainError("nonlinear_lie_step: step index outside grid");
    const double t = p.grid.time(n);
    const double tau = p.grid.step();
    const Vector star = detail::rk4_solve(p.f1, t, tau, cn, substeps, "F1");
    return detail::rk4_solve(p.f2, t, tau, star, substeps, "F2");
}

inline Vector nonlinear_lie_step(const NonlinearSplitProblem& p, std::size_t n, int substeps) {
    return nonlinear_lie_step(p, n, p.c0, substeps);
}

// Leading term of the Lie defect per unit step, (tau/2) [A,B] c.
inline Vector lie_local_error_leading(const Matrix& a, const Matrix& b, const Vector& c,
                                      double tau) {
    const Matrix ab = commutator(a, b);
    if (c.size() != a.rows()) throw DimensionError("lie_local_error_leading: state length");
    return (0.5 * tau) * (ab * c);
}

// (tau^2 / 24) ([B,[B,A]] - 2 [A,[A,B]]) c. This is the leading defect per
// unit step of the composition with B half-steps around a full A step; for
// A half-steps around B swap the arguments.
inline Vector strang_local_error_leading(const Matrix& a, const Matrix& b, const Vector& c,
                                         double tau) {
    const Matrix ab = commutator(a, b);
    const Matrix ba = -1.0 * ab;
    const Matrix m = commutator(b, ba) - 2.0 * commutator(a, ab);
    if (c.size() != a.rows()) throw DimensionError("strang_local_error_leading: state length");
    return (tau * tau / 24.0) * (m * c);
}

// Marches the whole grid. The returned trajectory starts with the initial
// state and has one record per step.
inline Trajectory run_scheme(const SplitProblem& p, Scheme scheme,
                             const std::optional<IterativeConfig>& cfg = std::nullopt) {
    p.validate();
    if (scheme == Scheme::iterative && !cfg) {
        throw DomainError("run_scheme: the iterative scheme needs an IterativeConfig");
    }
    detail::Stepper stepper(p);
    Trajectory out;
    out.reserve(p.grid.n_steps() + 1);
    out.push_back({p.grid.t0(), p.c0, 0, true});
    Vector c = p.c0;
    for (std::size_t n = 0; n < p.grid.n_steps(); ++n) {
        StepRecord rec;
        rec.t = p.grid.time(n + 1);
        try {
            switch (scheme) {
            case Scheme::lie: c = stepper.lie(n, c); break;
            case Scheme::swss: c = stepper.swss(n, c); break;
            case Scheme::strang: c = stepper.strang(n, c); break;
            case Scheme::iterative: {
                IterativeResult r = stepper.iterative(n, c, *cfg);
                c = std::move(r.state);
                rec.iterations_used = r.iterations;
                rec.converged = r.converged;
                break;
            }
            }
        } catch (const StepError&) {
            throw;
        } catch (const std::exception& e) {
            throw StepError(n, e.what());
        }
        rec.state = c;
        out.push_back(std::move(rec));
    }
    return out;
}

} // namespace opsplit
