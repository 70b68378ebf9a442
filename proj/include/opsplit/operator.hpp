#pragma once

// Linear operators acting on the state, possibly time-dependent, and the
// exact flows of c' = X(t) c used by every scheme.

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>

#include "opsplit/errors.hpp"
#include "opsplit/linalg.hpp"
#include "opsplit/quadrature.hpp"

namespace opsplit {

class Operator {
public:
    using MatrixFn = std::function<Matrix(double)>;
    using DiagonalFn = std::function<Vector(double)>;
    // Returns int_a^b of the diagonal entries.
    using DiagonalIntegralFn = std::function<Vector(double, double)>;

    Operator() = default;

    // A constant operator; implicit so a Matrix can stand in for one.
    Operator(Matrix m) : kind_(Kind::constant), size_(m.rows()), constant_(std::move(m)) {
        require_square(constant_, "Operator");
    }

    static Operator constant(Matrix m) { return Operator(std::move(m)); }

    static Operator zero(std::size_t n) { return Operator(Matrix(n, n)); }

    // Diagonal time-dependent operator. When `integral` is empty the
    // diagonal is integrated with composite Boole on four panels, which is
    // exact for polynomial entries up to degree five.
    static Operator diagonal(std::size_t n, DiagonalFn entries, DiagonalIntegralFn integral = {}) {
        Operator op;
        op.kind_ = Kind::diagonal;
        op.size_ = n;
        op.diagonal_ = std::move(entries);
        op.integral_ = std::move(integral);
        return op;
    }

    // General time-dependent operator. Its flow can only be formed when the
    // sampled values are diagonal.
    static Operator time_dependent(std::size_t n, MatrixFn at) {
        Operator op;
        op.kind_ = Kind::general;
        op.size_ = n;
        op.general_ = std::move(at);
        return op;
    }

    std::size_t size() const noexcept { return size_; }
    bool is_constant() const noexcept { return kind_ == Kind::constant; }

    const Matrix& matrix() const {
        if (kind_ != Kind::constant) throw UnsupportedOperatorError("operator is time-dependent");
        return constant_;
    }

    Matrix at(double t) const {
        switch (kind_) {
        case Kind::constant: return constant_;
        case Kind::diagonal: return Matrix::diagonal(checked_diagonal(t));
        case Kind::general: {
            Matrix m = general_(t);
            if (m.rows() != size_ || m.cols() != size_) {
                throw DimensionError("Operator: B(t) has the wrong shape");
            }
            return m;
        }
        }
        return constant_;
    }

    Vector apply(double t, const Vector& c) const {
        if (c.size() != size_) throw DimensionError("Operator::apply: state length");
        if (kind_ == Kind::constant) return constant_ * c;
        if (kind_ == Kind::diagonal) {
            Vector d = checked_diagonal(t);
            for (std::size_t i = 0; i < size_; ++i) d[i] *= c[i];
            return d;
        }
        return at(t) * c;
    }

    // int_a^b of the diagonal for operators whose flow is a diagonal
    // exponential.
    Vector diagonal_integral(double a, double b) const {
        if (kind_ == Kind::diagonal && integral_) return integral_(a, b);
        if (kind_ == Kind::general) {
            for (double t : {a, 0.5 * (a + b), b}) {
                if (!at(t).is_diagonal()) {
                    throw UnsupportedOperatorError(
                        "time-dependent operator is not diagonal; its flow is not "
                        "exp(int B dt)");
                }
            }
        }
        const double lo = std::min(a, b);
        const double hi = std::max(a, b);
        auto entries = [this](double t) {
            return kind_ == Kind::diagonal ? checked_diagonal(t) : at(t).diag();
        };
        Vector s = integrate_vector(entries, lo, hi, rule_coefficients(4), 4);
        if (b < a) s *= -1.0;
        return s;
    }

private:
    enum class Kind { constant, diagonal, general };

    Vector checked_diagonal(double t) const {
        Vector d = diagonal_(t);
        if (d.size() != size_) throw DimensionError("Operator: diagonal has the wrong length");
        return d;
    }

    Kind kind_ = Kind::constant;
    std::size_t size_ = 0;
    Matrix constant_;
    DiagonalFn diagonal_;
    DiagonalIntegralFn integral_;
    MatrixFn general_;
};

// Exact solution operator of c' = X(t) c. Constant operators cache
// exp(duration X) per distinct duration; instances are cheap to build and
// meant to live for one run.
class ExactFlow {
public:
    explicit ExactFlow(const Operator& op) : op_(&op) {}

    // Advances c from t_from by `duration`, which may be negative.
    Vector advance(double t_from, double duration, const Vector& c) {
        if (c.size() != op_->size()) throw DimensionError("ExactFlow: state length");
        if (duration == 0.0) return c;
        if (op_->is_constant()) {
            auto it = cache_.find(duration);
            if (it == cache_.end()) {
                it = cache_.emplace(duration, expm(duration * op_->matrix())).first;
            }
            return it->second * c;
        }
        Vector log_gain = op_->diagonal_integral(t_from, t_from + duration);
        Vector out(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) out[i] = std::exp(log_gain[i]) * c[i];
        return out;
    }

private:
    const Operator* op_;
    std::map<double, Matrix> cache_;
};

} // namespace opsplit
