#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "opsplit/analysis.hpp"
#include "opsplit/models.hpp"
#include "oracles.hpp"

using namespace opsplit;
using namespace opsplit::testing;

namespace {

TransportConfig small_config() {
    TransportConfig cfg;
    cfg.n_points = 40;
    return cfg;
}

} // namespace

TEST(Example1, ClosedForm) {
    EXPECT_EQ(example1_exact(0.0, 3.0), 3.0);
    EXPECT_NEAR(example1_exact(1.0, 1.0), 4.481689, 1e-6);
    EXPECT_DOUBLE_EQ(example1_exact(0.5, 2.0), 2.0 * std::exp(0.625));
    EXPECT_THROW(example1_exact(-0.1), DomainError);
}

TEST(Example1, SatisfiesOdeResidually) {
    const double h = 1e-5;
    for (int k = 1; k < 40; ++k) {
        const double t = 0.05 * k;
        const double d = (example1_exact(t + h) - example1_exact(t - h)) / (2 * h);
        EXPECT_LT(std::abs(d - (1 + t) * example1_exact(t)), 1e-8 * std::max(1.0, example1_exact(t)));
    }
}

TEST(Example1, ProblemShape) {
    const SplitProblem p = example1_problem(2.0, 1.0, 4);
    EXPECT_EQ(p.c0, Vector{2.0});
    EXPECT_EQ(p.grid.n_steps(), 4u);
    EXPECT_EQ(p.b.at(0.75), Matrix{{0.75}});
    EXPECT_NEAR(p.b.diagonal_integral(0.0, 1.0)[0], 0.5, 1e-15);
}

TEST(TrapezoidClosure, Values) {
    EXPECT_EQ(trapezoid_closure_exact(0.0, 1.7), 1.7);
    EXPECT_NEAR(trapezoid_closure_exact(1.0, 1.0), 1.568051, 1e-6);
    EXPECT_EQ(trapezoid_closure_exact(2.0, 0.0), 0.0);
    EXPECT_THROW(trapezoid_closure_exact(-1.0, 1.0), DomainError);
}

TEST(TrapezoidClosure, MatchesFineStepIntegration) {
    for (double u0 : {1.0, -0.3, 2.5}) {
        auto f = [u0](double t, double u) { return 0.5 * t * (u0 + u); };
        for (double t : {0.5, 1.0, 2.0}) {
            EXPECT_NEAR(rk4(f, u0, t, 4000), trapezoid_closure_exact(t, u0), 1e-8 * std::max(1.0, std::abs(u0)));
        }
    }
}

TEST(TrapezoidClosure, SatisfiesOdeResidually) {
    const double h = 1e-5;
    for (int k = 1; k < 20; ++k) {
        const double t = 0.1 * k;
        const double d = (trapezoid_closure_exact(t + h, 1.0) - trapezoid_closure_exact(t - h, 1.0)) / (2 * h);
        EXPECT_LT(std::abs(d - 0.5 * t * (1.0 + trapezoid_closure_exact(t, 1.0))), 1e-8);
    }
}

TEST(SimpsonClosure, MatchesCoefficientOracleExactly) {
    const std::vector<Rational> a = simpson_closure_series_exact(8);
    const std::vector<Frac> oracle = simpson_oracle(8);
    ASSERT_EQ(a.size(), 9u);
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].num, oracle[k].n) << "k=" << k;
        EXPECT_EQ(a[k].den, oracle[k].d) << "k=" << k;
    }
}

TEST(SimpsonClosure, StatedCoefficients) {
    const std::vector<Rational> a = simpson_closure_series_exact(8);
    EXPECT_EQ(a[0], (Rational{1, 1}));
    for (std::size_t k = 1; k < a.size(); k += 2) EXPECT_EQ(a[k].num, 0) << "k=" << k;
    EXPECT_EQ(a[2], (Rational{1, 2}));
    EXPECT_EQ(a[4], (a[2] * Rational{1, 12}));
    const std::vector<double> scaled = simpson_closure_series(3.0, 4);
    EXPECT_DOUBLE_EQ(scaled[0], 3.0);
    EXPECT_DOUBLE_EQ(scaled[2], 1.5);
    EXPECT_THROW(simpson_closure_series_exact(1), DomainError);
}

// Truncated at n terms the residual u' - (t/6)(u0 + 4u(t/2) + u) is O(t^n).
TEST(SimpsonClosure, TruncatedSeriesResidualOrder) {
    const int n = 6;
    const std::vector<double> a = simpson_closure_series(1.0, n);
    std::vector<double> da;
    for (std::size_t k = 1; k < a.size(); ++k) da.push_back(static_cast<double>(k) * a[k]);
    auto residual = [&](double t) {
        return evaluate_series(da, t) -
               t / 6.0 * (a[0] + 4.0 * evaluate_series(a, t / 2) + evaluate_series(a, t));
    };
    std::vector<std::pair<double, double>> errs;
    for (double t : {0.4, 0.2, 0.1, 0.05}) errs.emplace_back(t, std::abs(residual(t)));
    EXPECT_GE(observed_order(errs).observed_order, n - 0.1);
}

TEST(TransportMatrices, Convection) {
    TransportConfig cfg;
    cfg.n_points = 3;
    cfg.diffusion = 0.0;
    cfg.v = cfg.dx();
    const Matrix a = build_transport_matrices(cfg).a;
    const Matrix expected{{1, 0, 0}, {-1, 1, 0}, {0, -1, 1}};
    EXPECT_LE(opsplit::norm_inf(a - expected), 1e-15);

    cfg.signs = TransportSigns::upwind;
    EXPECT_LE(opsplit::norm_inf(build_transport_matrices(cfg).a + expected), 1e-15);
}

TEST(TransportMatrices, Diffusion) {
    TransportConfig cfg;
    cfg.n_points = 3;
    cfg.v = 0.0;
    cfg.diffusion = cfg.dx() * cfg.dx();
    const Matrix a = build_transport_matrices(cfg).a;
    EXPECT_LE(opsplit::norm_inf(a - Matrix{{-2, 1, 0}, {1, -2, 1}, {0, 1, -2}}), 1e-14);
}

TEST(TransportMatrices, Lambda1AndValidation) {
    TransportConfig cfg;
    cfg.lambda1 = 0.0;
    EXPECT_EQ(build_transport_matrices(cfg).lambda1, Matrix(cfg.n_points, cfg.n_points));
    cfg.lambda1 = 0.3;
    EXPECT_EQ(build_transport_matrices(cfg).lambda1, 0.3 * Matrix::identity(cfg.n_points));
    cfg.n_points = 2;
    EXPECT_THROW(build_transport_matrices(cfg), DomainError);
    cfg.n_points = 10;
    cfg.diffusion = -1.0;
    EXPECT_THROW(build_transport_matrices(cfg), DomainError);
}

TEST(TransportMatrices, RowStructure) {
    TransportConfig diff = small_config();
    diff.v = 0.0;
    const double s = diff.diffusion / (diff.dx() * diff.dx());
    const Matrix d = build_transport_matrices(diff).a;
    TransportConfig conv = small_config();
    conv.diffusion = 0.0;
    const double w = conv.v / conv.dx();
    const Matrix c = build_transport_matrices(conv).a;
    const std::size_t n = diff.n_points;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        int plus = 0, minus = 0;
        for (std::size_t j = 0; j < n; ++j) {
            row += d(i, j);
            if (c(i, j) == w) ++plus;
            else if (c(i, j) == -w) ++minus;
            else EXPECT_EQ(c(i, j), 0.0);
        }
        if (i == 0 || i + 1 == n) {
            EXPECT_NEAR(row, -s, 1e-9);
        } else {
            EXPECT_NEAR(row, 0.0, 1e-9);
        }
        EXPECT_EQ(plus, 1);
        EXPECT_EQ(minus, i == 0 ? 0 : 1);
    }
}

TEST(TransportSetup, NodesAndInitialState) {
    const TransportConfig cfg = small_config();
    const std::vector<double> x = transport_nodes(cfg);
    ASSERT_EQ(x.size(), 40u);
    EXPECT_NEAR(x.front(), 0.0125, 1e-15);
    EXPECT_NEAR(x.back(), 0.9875, 1e-15);
    const Vector c0 = transport_initial_state(cfg);
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_DOUBLE_EQ(c0[i], std::exp(-100.0 * (x[i] - 0.5) * (x[i] - 0.5)));
    }
}

TEST(MemoryCase1, Values) {
    TransportConfig cfg = small_config();
    const Operator b = memory_case1_B(cfg);
    EXPECT_EQ(b.at(0.0), -cfg.lambda1 * Matrix::identity(cfg.n_points));
    EXPECT_EQ(b.at(2.0), (-cfg.lambda1 + 2.0 * cfg.lambda2) * Matrix::identity(cfg.n_points));
    const Vector integral = b.diagonal_integral(0.0, 1.0);
    EXPECT_NEAR(std::exp(integral[3]), std::exp(-cfg.lambda1 + cfg.lambda2 / 2), 1e-15);

    cfg.lambda2 = 0.0;
    const Operator c = memory_case1_B(cfg);
    EXPECT_EQ(c.at(0.0), c.at(5.0));
}

TEST(MemoryCase2, Values) {
    TransportConfig cfg;
    cfg.n_points = 3;
    cfg.lambda1 = 0.25;
    cfg.lambda2 = 1.0;
    const QuadratureRule simpson = rule_coefficients(2);

    const NodalTrajectory zero(0.0, 0.1, std::vector<Vector>(5, Vector(3)));
    const Vector c{1, 2, 3};
    const Vector r = memory_case2_B(zero, cfg, simpson).apply(0.3, c);
    EXPECT_LE(opsplit::norm_inf(r - (-0.25) * c), 1e-15);

    const double tau = 0.4;
    const NodalTrajectory ones(1.0, tau / 4, std::vector<Vector>(5, Vector(3, 1.0)));
    const Vector m = memory_case2_B(ones, cfg, simpson).memory(1.0 + tau);
    EXPECT_NEAR(m[0], tau, 1e-15);

    std::vector<Vector> lin;
    for (int k = 0; k <= 4; ++k) lin.push_back(Vector(3, 0.25 * k));
    const NodalTrajectory linear(0.0, 0.25, lin);
    EXPECT_NEAR(memory_case2_B(linear, cfg, simpson).memory(1.0)[1], 0.5, 1e-15);

    EXPECT_THROW(memory_case2_B(linear, cfg, simpson).memory(1.5), DomainError);
    EXPECT_THROW(memory_case2_B(linear, cfg, simpson, 0), DomainError);
    cfg.n_points = 4;
    EXPECT_THROW(memory_case2_B(linear, cfg, simpson), DimensionError);
}

// For a history frozen at c from t = 0, lambda2 int_0^t c = lambda2 t c,
// which is the Case 1 moment closure.
TEST(MemoryClosures, AgreeOnManufacturedHistory) {
    const TransportConfig cfg = small_config();
    const Vector c = transport_initial_state(cfg);
    const NodalTrajectory frozen(0.0, 0.01, std::vector<Vector>(17, c));
    const Case2Source case2 = memory_case2_B(frozen, cfg, rule_coefficients(2), 8);
    const Operator case1 = memory_case1_B(cfg);
    for (double t : {0.0, 0.05, 0.1, 0.16}) {
        EXPECT_LE(opsplit::norm_inf(case2.apply(t, c) - case1.apply(t, c)), 1e-14) << t;
    }
}

TEST(MemoryKinds, Parse) {
    EXPECT_EQ(parse_memory_kind("case1"), MemoryKind::case1_moment);
    EXPECT_EQ(parse_memory_kind("case2"), MemoryKind::case2_history);
    EXPECT_EQ(to_string(MemoryKind::case2_history), "case2");
    EXPECT_THROW(parse_memory_kind("case3"), DomainError);
}

TEST(ReferenceSolution, ConstantWhenEverythingVanishes) {
    TransportConfig cfg = small_config();
    cfg.v = cfg.diffusion = cfg.lambda1 = cfg.lambda2 = 0.0;
    const Vector c0 = transport_initial_state(cfg);
    const Trajectory tr = reference_solution(cfg, {}, TimeGrid(0.0, 1.0, 10), c0, 4);
    ASSERT_EQ(tr.size(), 11u);
    for (const StepRecord& r : tr) EXPECT_EQ(r.state, c0);
}

TEST(ReferenceSolution, PureDecay) {
    TransportConfig cfg = small_config();
    cfg.v = cfg.diffusion = cfg.lambda2 = 0.0;
    cfg.lambda1 = 0.7;
    const Vector c0 = transport_initial_state(cfg);
    for (MemoryKind kind : {MemoryKind::case1_moment, MemoryKind::case2_history}) {
        MemoryClosure closure;
        closure.kind = kind;
        const Trajectory tr = reference_solution(cfg, closure, TimeGrid(0.0, 1.0, 10), c0, 4);
        for (const StepRecord& r : tr) {
            EXPECT_LE(opsplit::norm_inf(r.state - std::exp(-0.7 * r.t) * c0), 1e-9);
        }
    }
}

TEST(ReferenceSolution, RefinementSelfConsistency) {
    const TransportConfig cfg;
    const Vector c0 = transport_initial_state(cfg);
    const TimeGrid grid = TimeGrid::with_step(0.0, 1.0, 0.01);
    const Trajectory r16 = reference_solution(cfg, {}, grid, c0, 16);
    const Trajectory r32 = reference_solution(cfg, {}, grid, c0, 32);
    EXPECT_LT(error_vs_reference(r16, r32, ErrorNorm::inf, 1.0, true), 1e-8);
}

TEST(ReferenceSolution, ErrorPaths) {
    TransportConfig cfg = small_config();
    const Vector c0 = transport_initial_state(cfg);
    EXPECT_THROW(reference_solution(cfg, {}, TimeGrid(0.0, 1.0, 10), c0, 3), DomainError);
    EXPECT_THROW(reference_solution(cfg, {}, TimeGrid(0.0, 1.0, 10), Vector(3), 4), DimensionError);
    cfg.diffusion = 5.0;
    try {
        reference_solution(cfg, {}, TimeGrid(0.0, 1.0, 10), c0, 4);
        FAIL() << "expected DivergenceError";
    } catch (const DivergenceError& e) {
        EXPECT_NE(std::string(e.what()).find("smaller dt"), std::string::npos);
    }
}

TEST(TransportProblem, NoAbsorptionAllSchemesMatchReference) {
    TransportConfig cfg = small_config();
    cfg.lambda1 = cfg.lambda2 = 0.0;
    const Vector c0 = transport_initial_state(cfg);
    const TimeGrid grid = TimeGrid::with_step(0.0, 0.5, 0.01);
    const Trajectory ref = reference_solution(cfg, {}, grid, c0, 64);
    const SplitProblem p = transport_problem(cfg, {}, grid, c0);
    for (Scheme s : {Scheme::lie, Scheme::swss, Scheme::strang}) {
        EXPECT_LT(error_vs_reference(run_scheme(p, s), ref), 1e-9) << to_string(s);
    }
    IterativeConfig it;
    it.mode = IterationMode::alternating;
    it.max_iters = 3;
    EXPECT_LT(error_vs_reference(run_scheme(p, Scheme::iterative, it), ref), 1e-9);
}

TEST(TransportProblem, Case2OnlyForIterativeScheme) {
    const TransportConfig cfg = small_config();
    MemoryClosure closure;
    closure.kind = MemoryKind::case2_history;
    const Vector c0 = transport_initial_state(cfg);
    const TimeGrid grid = TimeGrid::with_step(0.0, 0.1, 0.01);
    const SplitProblem p = transport_problem(cfg, closure, grid, c0);
    EXPECT_THROW(run_scheme(p, Scheme::lie), StepError);
    IterativeConfig it;
    it.max_iters = 4;
    const Trajectory tr = run_scheme(p, Scheme::iterative, it);
    const Trajectory ref = reference_solution(cfg, closure, grid, c0, 16);
    // The per-step restart of the memory integral is the dominant error.
    EXPECT_LT(error_vs_reference(tr, ref), 1e-3);
    EXPECT_THROW(transport_problem(cfg, closure, grid, Vector(3)), DimensionError);
}
