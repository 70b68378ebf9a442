#pragma once

// Error measurement, observed convergence orders, leading-term fits and the
// logarithmic-norm growth bound.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "opsplit/errors.hpp"
#include "opsplit/linalg.hpp"
#include "opsplit/schemes.hpp"
#include "opsplit/trajectory.hpp"

namespace opsplit {

enum class ErrorNorm { inf, l2_weighted };

inline std::string_view to_string(ErrorNorm n) {
    return n == ErrorNorm::inf ? "inf" : "l2-weighted";
}

struct ErrorRecord {
    std::string scheme;
    double dt = 0.0;
    int iterations = 0;
    double error = 0.0;
    ErrorNorm norm = ErrorNorm::inf;
};

inline double vector_error(const Vector& a, const Vector& b, ErrorNorm norm, double dx) {
    const Vector diff = a - b;
    return norm == ErrorNorm::inf ? norm_inf(diff) : std::sqrt(dx) * norm_l2(diff);
}

// Final-time error between two trajectories sampled at the same times;
// with `whole_trajectory` the maximum over all sample times instead.
// `dx` weights the l2 norm.
inline double error_vs_reference(const Trajectory& approx, const Trajectory& ref,
                                 ErrorNorm norm = ErrorNorm::inf, double dx = 1.0,
                                 bool whole_trajectory = false) {
    if (approx.size() != ref.size() || approx.empty()) {
        throw DimensionError("error_vs_reference: trajectories have " +
                             std::to_string(approx.size()) + " and " +
                             std::to_string(ref.size()) + " samples");
    }
    for (std::size_t k = 0; k < approx.size(); ++k) {
        const double scale = std::max(1.0, std::abs(ref[k].t));
        if (std::abs(approx[k].t - ref[k].t) > 1e-12 * scale) {
            throw DimensionError("error_vs_reference: sample times differ at index " +
                                 std::to_string(k));
        }
    }
    if (!whole_trajectory) return vector_error(approx.back().state, ref.back().state, norm, dx);
    double worst = 0.0;
    for (std::size_t k = 0; k < approx.size(); ++k) {
        worst = std::max(worst, vector_error(approx[k].state, ref[k].state, norm, dx));
    }
    return worst;
}

struct OrderEstimate {
    std::string scheme;
    double observed_order = 0.0;
    int pairs_used = 0;
    // Every error sat below the rounding floor.
    bool exact = false;
};

// Errors below this are treated as rounding noise and skipped.
inline constexpr double order_error_floor = 1e-12;

// Mean of log(e_k / e_{k+1}) / log(dt_k / dt_{k+1}) over consecutive pairs;
// for a halving sequence that is log2 of the error ratio.
inline OrderEstimate observed_order(const std::vector<std::pair<double, double>>& errors,
                                    std::string scheme = {}) {
    if (errors.size() < 2) throw DomainError("observed_order: need at least two (dt, error) pairs");
    OrderEstimate est;
    est.scheme = std::move(scheme);
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
        const auto [dt0, e0] = errors[k];
        const auto [dt1, e1] = errors[k + 1];
        if (!(dt0 > 0.0) || !(dt1 > 0.0) || dt0 == dt1) {
            throw DomainError("observed_order: dt values must be positive and distinct");
        }
        if (e0 < order_error_floor || e1 < order_error_floor) continue;
        sum += std::log(e0 / e1) / std::log(dt0 / dt1);
        ++est.pairs_used;
    }
    if (est.pairs_used == 0) {
        est.exact = true;
        return est;
    }
    est.observed_order = sum / est.pairs_used;
    return est;
}

struct LeadingTermFit {
    // Predicted leading term vanished: the scheme is exact for the pair.
    bool exact = false;
    // Projection of the measured defect onto the prediction at the
    // smallest dt; 1 when the prediction is right.
    double constant = 0.0;
    // Observed order of ||defect - prediction|| in dt.
    double residual_order = 0.0;
    std::vector<double> constants;
};

// One-step defect per unit step, (exp(tau (A + B)) c - S(tau) c) / tau, for
// scheme S in {lie, strang}, regressed on the predicted leading term.
inline LeadingTermFit leading_term_fit(Scheme scheme, const Matrix& a, const Matrix& b,
                                       const Vector& c, const std::vector<double>& dts) {
    if (scheme != Scheme::lie && scheme != Scheme::strang) {
        throw DomainError("leading_term_fit: only lie and strang have a leading-term formula");
    }
    if (dts.size() < 2) throw DomainError("leading_term_fit: need at least two dt values");
    for (std::size_t k = 0; k + 1 < dts.size(); ++k) {
        if (!(dts[k + 1] < dts[k])) throw DomainError("leading_term_fit: dts must decrease");
    }
    LeadingTermFit fit;
    std::vector<std::pair<double, double>> residuals;
    for (double tau : dts) {
        const Vector predicted = scheme == Scheme::lie ? lie_local_error_leading(a, b, c, tau)
                                                       : strang_local_error_leading(a, b, c, tau);
        const double pp = dot(predicted, predicted);
        if (norm_inf(predicted) <= 1e-14 * std::max(1.0, norm_inf(c))) {
            fit.exact = true;
            return fit;
        }
        SplitProblem p{a, b, c, TimeGrid(0.0, tau, 1)};
        const Vector split = scheme == Scheme::lie ? lie_step(p, 0) : strang_step(p, 0);
        Vector defect = expm(tau * (a + b)) * c - split;
        defect *= 1.0 / tau;
        fit.constants.push_back(dot(defect, predicted) / pp);
        residuals.emplace_back(tau, norm_inf(defect - predicted));
    }
    fit.constant = fit.constants.back();
    fit.residual_order = observed_order(residuals).observed_order;
    return fit;
}

struct GrowthBoundReport {
    bool holds = true;
    double log_norm = 0.0;
    // max over t of ||exp(tM)||_inf - exp(t mu_inf(M)); <= 1e-10 when the
    // bound holds.
    double max_excess = -std::numeric_limits<double>::infinity();
    // min over t of exp(t mu_inf(M)) - ||exp(tM)||_inf.
    double min_slack = std::numeric_limits<double>::infinity();
};

inline constexpr double growth_bound_tolerance = 1e-10;

// Checks ||exp(tM)||_inf <= exp(t mu_inf(M)) at each sample time.
inline GrowthBoundReport growth_bound_check(const Matrix& m, const std::vector<double>& times) {
    require_square(m, "growth_bound_check");
    GrowthBoundReport r;
    r.log_norm = log_norm_inf(m);
    for (double t : times) {
        const double lhs = norm_inf(expm(t * m));
        const double rhs = std::exp(t * r.log_norm);
        r.max_excess = std::max(r.max_excess, lhs - rhs);
        r.min_slack = std::min(r.min_slack, rhs - lhs);
        if (lhs > rhs + growth_bound_tolerance) r.holds = false;
    }
    return r;
}

} // namespace opsplit
