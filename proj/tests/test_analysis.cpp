#include <cmath>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "opsplit/analysis.hpp"
#include "opsplit/models.hpp"

using namespace opsplit;
using opsplit::testing::Gen;
using opsplit::testing::standard_a;
using opsplit::testing::standard_b;

namespace {

Trajectory constant_trajectory(const Vector& c, std::size_t n) {
    Trajectory tr;
    for (std::size_t k = 0; k <= n; ++k) tr.push_back({0.1 * static_cast<double>(k), c, 0, true});
    return tr;
}

std::vector<double> halving(double dt0, int count) {
    std::vector<double> out;
    for (int k = 0; k < count; ++k) out.push_back(dt0 / std::pow(2.0, k));
    return out;
}

} // namespace

TEST(ErrorVsReference, IdenticalAndOffset) {
    const Trajectory a = constant_trajectory(Vector{1, 2, 3}, 4);
    EXPECT_EQ(error_vs_reference(a, a), 0.0);
    const Trajectory b = constant_trajectory(Vector{1.25, 2.25, 3.25}, 4);
    EXPECT_DOUBLE_EQ(error_vs_reference(a, b), 0.25);
    EXPECT_DOUBLE_EQ(error_vs_reference(a, b, ErrorNorm::l2_weighted, 0.04), 0.2 * std::sqrt(3 * 0.0625));
}

TEST(ErrorVsReference, FinalTimeVersusWholeTrajectory) {
    Trajectory a = constant_trajectory(Vector{0.0}, 3);
    const Trajectory b = constant_trajectory(Vector{0.0}, 3);
    a[1].state = Vector{5.0};
    EXPECT_EQ(error_vs_reference(a, b), 0.0);
    EXPECT_EQ(error_vs_reference(a, b, ErrorNorm::inf, 1.0, true), 5.0);
}

TEST(ErrorVsReference, MismatchedSampling) {
    const Trajectory a = constant_trajectory(Vector{1}, 3);
    EXPECT_THROW(error_vs_reference(a, constant_trajectory(Vector{1}, 4)), DimensionError);
    Trajectory shifted = a;
    shifted[2].t += 0.01;
    EXPECT_THROW(error_vs_reference(a, shifted), DimensionError);
    EXPECT_THROW(error_vs_reference(a, constant_trajectory(Vector{1, 1}, 3)), DimensionError);
}

// One Lie step of length 1 on the standard pair from [1, 0]: the split flow
// is [[1,1],[1,2]] [1,0] = [1,1] and the exact one [cosh 1, sinh 1].
TEST(ErrorVsReference, HandComputedLieStep) {
    const SplitProblem p{standard_a(), standard_b(), Vector{1, 0}, TimeGrid(0.0, 1.0, 1)};
    const Trajectory lie = run_scheme(p, Scheme::lie);
    Trajectory exact = lie;
    exact.back().state = Vector{std::cosh(1.0), std::sinh(1.0)};
    EXPECT_NEAR(lie.back().state[0], 1.0, 1e-15);
    EXPECT_NEAR(lie.back().state[1], 1.0, 1e-15);
    EXPECT_NEAR(error_vs_reference(lie, exact), std::cosh(1.0) - 1.0, 1e-15);
}

TEST(ObservedOrder, PowerLaws) {
    for (int p : {1, 2, 4}) {
        std::vector<std::pair<double, double>> errs;
        for (double dt : halving(0.1, 5)) errs.emplace_back(dt, std::pow(dt, p));
        const OrderEstimate est = observed_order(errs, "x");
        EXPECT_NEAR(est.observed_order, p, 1e-12);
        EXPECT_EQ(est.pairs_used, 4);
        EXPECT_FALSE(est.exact);
        EXPECT_EQ(est.scheme, "x");
    }
}

TEST(ObservedOrder, InvariantUnderScaling) {
    Gen gen(13);
    std::vector<std::pair<double, double>> errs, scaled;
    for (double dt : halving(0.2, 6)) {
        const double e = dt * dt * gen.uniform(0.5, 2.0);
        errs.emplace_back(dt, e);
        scaled.emplace_back(dt, 37.5 * e);
    }
    EXPECT_NEAR(observed_order(errs).observed_order, observed_order(scaled).observed_order, 1e-12);
}

TEST(ObservedOrder, FloorAndExactness) {
    EXPECT_TRUE(observed_order({{0.1, 0.0}, {0.05, 0.0}}).exact);
    EXPECT_TRUE(observed_order({{0.1, 1e-14}, {0.05, 1e-15}}).exact);
    const OrderEstimate mixed = observed_order({{0.1, 1e-2}, {0.05, 2.5e-3}, {0.025, 1e-13}});
    EXPECT_EQ(mixed.pairs_used, 1);
    EXPECT_NEAR(mixed.observed_order, 2.0, 1e-12);
    EXPECT_THROW(observed_order({{0.1, 1.0}}), DomainError);
    EXPECT_THROW(observed_order({{0.1, 1.0}, {0.1, 0.5}}), DomainError);
    EXPECT_THROW(observed_order({{0.1, 1.0}, {-0.1, 0.5}}), DomainError);
}

TEST(ObservedOrder, LieOnNoncommutingPair) {
    const Vector c0{1, 1};
    const Vector exact = expm(standard_a() + standard_b()) * c0;
    std::vector<std::pair<double, double>> errs;
    for (double dt : halving(0.1, 5)) {
        const SplitProblem p{standard_a(), standard_b(), c0, TimeGrid::with_step(0.0, 1.0, dt)};
        errs.emplace_back(dt, norm_inf(run_scheme(p, Scheme::lie).back().state - exact));
    }
    EXPECT_NEAR(observed_order(errs, "lie").observed_order, 1.0, 0.15);
}

TEST(LeadingTermFit, CommutingPairReportsExactness) {
    const LeadingTermFit fit = leading_term_fit(Scheme::lie, Matrix{{1, 0}, {0, 2}},
                                                Matrix{{-1, 0}, {0, 3}}, Vector{1, 1}, halving(0.1, 3));
    EXPECT_TRUE(fit.exact);
    EXPECT_TRUE(leading_term_fit(Scheme::strang, Matrix{{1, 0}, {0, 2}}, Matrix{{-1, 0}, {0, 3}},
                                 Vector{1, 1}, halving(0.1, 3))
                    .exact);
}

TEST(LeadingTermFit, LieOnStandardPair) {
    const LeadingTermFit fit =
        leading_term_fit(Scheme::lie, standard_a(), standard_b(), Vector{1, 1}, halving(0.1, 7));
    EXPECT_FALSE(fit.exact);
    EXPECT_NEAR(fit.constant, 1.0, 0.1);
    EXPECT_GE(fit.residual_order, 1.9);
    EXPECT_EQ(fit.constants.size(), 7u);
}

TEST(LeadingTermFit, LieOnRandomPairs) {
    Gen gen(17);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix a = gen.matrix(3, 3), b = gen.matrix(3, 3);
        const Vector c = gen.vector(3);
        const LeadingTermFit fit = leading_term_fit(Scheme::lie, a, b, c, {1e-2, 5e-3, 2.5e-3});
        if (fit.exact) continue;
        EXPECT_GE(fit.constant, 0.8);
        EXPECT_LE(fit.constant, 1.2);
    }
}

// The Strang formula is the leading term of the B-half-step composition.
// Fitted against the A-half-step composition it predicts the right order
// but the wrong vector, so the constant is far from 1.
TEST(LeadingTermFit, StrangHalfStepOrderingMatters) {
    const LeadingTermFit fit =
        leading_term_fit(Scheme::strang, standard_a(), standard_b(), Vector{1, 1}, halving(0.1, 7));
    EXPECT_FALSE(fit.exact);
    EXPECT_GT(std::abs(fit.constant - 1.0), 0.5);

    std::vector<double> constants;
    for (double tau : halving(0.1, 7)) {
        const SplitProblem p{standard_a(), standard_b(), Vector{1, 1}, TimeGrid(0.0, tau, 1)};
        const Vector exact = expm(tau * (standard_a() + standard_b())) * Vector{1, 1};
        Vector defect = exact - strang_step(p, 0, p.c0, StrangOrder::b_half_steps);
        defect *= 1.0 / tau;
        const Vector predicted = strang_local_error_leading(standard_a(), standard_b(), Vector{1, 1}, tau);
        constants.push_back(dot(defect, predicted) / dot(predicted, predicted));
    }
    EXPECT_NEAR(constants.back(), 1.0, 0.1);
}

TEST(LeadingTermFit, ErrorPaths) {
    EXPECT_THROW(leading_term_fit(Scheme::swss, standard_a(), standard_b(), Vector{1, 1}, {0.1, 0.05}),
                 DomainError);
    EXPECT_THROW(leading_term_fit(Scheme::lie, standard_a(), standard_b(), Vector{1, 1}, {0.05, 0.1}),
                 DomainError);
    EXPECT_THROW(leading_term_fit(Scheme::lie, standard_a(), standard_b(), Vector{1, 1}, {0.1}),
                 DomainError);
}

TEST(GrowthBound, NegativeIdentity) {
    const GrowthBoundReport r = growth_bound_check(-1.0 * Matrix::identity(3), {0.0, 0.5, 1.0});
    EXPECT_TRUE(r.holds);
    EXPECT_EQ(r.log_norm, -1.0);
    EXPECT_NEAR(r.max_excess, 0.0, 1e-15);
}

TEST(GrowthBound, Nilpotent) {
    const Matrix m{{0, 1}, {0, 0}};
    std::vector<double> times;
    for (int k = 1; k <= 10; ++k) times.push_back(0.1 * k);
    const GrowthBoundReport r = growth_bound_check(m, times);
    EXPECT_TRUE(r.holds);
    EXPECT_EQ(r.log_norm, 1.0);
    for (double t : times) EXPECT_NEAR(norm_inf(expm(t * m)), 1.0 + t, 1e-14);
    EXPECT_NEAR(r.min_slack, std::exp(0.1) - 1.1, 1e-12);
}

TEST(GrowthBound, TransportMatrixAtDefaults) {
    std::vector<double> times;
    for (int k = 1; k <= 10; ++k) times.push_back(0.1 * k);
    const GrowthBoundReport r = growth_bound_check(build_transport_matrices(TransportConfig{}).a, times);
    EXPECT_TRUE(r.holds);
    EXPECT_LE(r.max_excess, growth_bound_tolerance);
}

TEST(GrowthBound, NeverViolatedOnRandomMatrices) {
    Gen gen(23);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = gen.size(1, 8);
        EXPECT_TRUE(growth_bound_check(gen.matrix(n, n, 2.0), {0.1, 0.5, 1.0}).holds);
    }
    EXPECT_THROW(growth_bound_check(Matrix(2, 3), {1.0}), DimensionError);
}
