#pragma once

// Dense real vectors and matrices, the matrix exponential, and the few
// matrix functions the splitting schemes are built from.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "opsplit/errors.hpp"

namespace opsplit {

namespace detail {

inline void require_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw DomainError(std::string(what) + " has a non-finite entry");
        }
    }
}

} // namespace detail

class Vector {
public:
    Vector() = default;

    explicit Vector(std::size_t n, double value = 0.0) : data_(n, value) {
        detail::require_finite(data_, "Vector");
    }

    Vector(std::initializer_list<double> values) : data_(values) {
        detail::require_finite(data_, "Vector");
    }

    explicit Vector(std::vector<double> values) : data_(std::move(values)) {
        detail::require_finite(data_, "Vector");
    }

    std::size_t size() const noexcept { return data_.size(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    auto begin() noexcept { return data_.begin(); }
    auto end() noexcept { return data_.end(); }
    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(),
                           [](double v) { return std::isfinite(v); });
    }

    Vector& operator+=(const Vector& o) {
        check_same(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }

    Vector& operator-=(const Vector& o) {
        check_same(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }

    Vector& operator*=(double s) {
        for (double& v : data_) v *= s;
        return *this;
    }

    // this += s * o
    Vector& axpy(double s, const Vector& o) {
        check_same(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
        return *this;
    }

    friend Vector operator+(Vector a, const Vector& b) { return a += b; }
    friend Vector operator-(Vector a, const Vector& b) { return a -= b; }
    friend Vector operator*(double s, Vector a) { return a *= s; }
    friend Vector operator*(Vector a, double s) { return a *= s; }

    friend bool operator==(const Vector&, const Vector&) = default;

private:
    void check_same(const Vector& o) const {
        if (o.size() != size()) {
            throw DimensionError("vector lengths differ: " + std::to_string(size()) +
                                 " vs " + std::to_string(o.size()));
        }
    }

    std::vector<double> data_;
};

inline double norm_inf(const Vector& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double norm_l2(const Vector& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimensionError("dot: vector lengths differ");
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// Row-major dense matrix.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, value) {
        detail::require_finite(data_, "Matrix");
    }

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (data_.size() != rows_ * cols_) {
            throw DimensionError("Matrix: " + std::to_string(data_.size()) +
                                 " entries for a " + std::to_string(rows_) + "x" +
                                 std::to_string(cols_) + " matrix");
        }
        detail::require_finite(data_, "Matrix");
    }

    Matrix(std::initializer_list<std::initializer_list<double>> rows)
        : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw DimensionError("Matrix: ragged initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
        detail::require_finite(data_, "Matrix");
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix diagonal(const Vector& d) {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool is_square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> values() const noexcept { return data_; }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(),
                           [](double v) { return std::isfinite(v); });
    }

    bool is_diagonal() const {
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                if (i != j && (*this)(i, j) != 0.0) return false;
        return true;
    }

    Vector diag() const {
        Vector d(std::min(rows_, cols_));
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = (*this)(i, i);
        return d;
    }

    Matrix& operator+=(const Matrix& o) {
        check_same(o, "+");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }

    Matrix& operator-=(const Matrix& o) {
        check_same(o, "-");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }

    Matrix& operator*=(double s) {
        for (double& v : data_) v *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(double s, Matrix a) { return a *= s; }
    friend Matrix operator*(Matrix a, double s) { return a *= s; }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) {
            throw DimensionError("matrix product: inner dimensions " +
                                 std::to_string(a.cols_) + " and " + std::to_string(b.rows_));
        }
        Matrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            double* crow = &c.data_[i * c.cols_];
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const double aik = a(i, k);
                if (aik == 0.0) continue;
                const double* brow = &b.data_[k * b.cols_];
                for (std::size_t j = 0; j < b.cols_; ++j) crow[j] += aik * brow[j];
            }
        }
        return c;
    }

    friend Vector operator*(const Matrix& a, const Vector& x) {
        if (a.cols_ != x.size()) {
            throw DimensionError("matrix-vector product: " + std::to_string(a.cols_) +
                                 " columns vs vector of length " + std::to_string(x.size()));
        }
        Vector y(a.rows_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            const double* row = &a.data_[i * a.cols_];
            double s = 0.0;
            for (std::size_t j = 0; j < a.cols_; ++j) s += row[j] * x[j];
            y[i] = s;
        }
        return y;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    void check_same(const Matrix& o, const char* op) const {
        if (o.rows_ != rows_ || o.cols_ != cols_) {
            throw DimensionError(std::string("matrix ") + op + ": shapes differ");
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Maximum absolute row sum.
inline double norm_inf(const Matrix& m) {
    double best = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) s += std::abs(m(i, j));
        best = std::max(best, s);
    }
    return best;
}

inline void require_square(const Matrix& m, const char* who) {
    if (!m.is_square()) {
        throw DimensionError(std::string(who) + ": matrix is " + std::to_string(m.rows()) +
                             "x" + std::to_string(m.cols()) + ", expected square");
    }
}

// Solves A X = B by LU with partial pivoting.
inline Matrix solve(Matrix a, Matrix b) {
    require_square(a, "solve");
    if (a.rows() != b.rows()) throw DimensionError("solve: right-hand side row count");
    const std::size_t n = a.rows();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
        if (a(piv, k) == 0.0) throw DomainError("solve: singular matrix");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(k, j), b(piv, j));
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            for (std::size_t j = 0; j < b.cols(); ++j) b(i, j) -= f * b(k, j);
        }
    }
    for (std::size_t kk = n; kk-- > 0;) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = b(kk, j);
            for (std::size_t i = kk + 1; i < n; ++i) s -= a(kk, i) * b(i, j);
            b(kk, j) = s / a(kk, kk);
        }
    }
    return b;
}

// exp(M) by scaling and squaring with the (6,6) diagonal Pade approximant.
// The scaled matrix satisfies ||M / 2^s||_inf <= 0.5.
inline Matrix expm(const Matrix& m) {
    require_square(m, "expm");
    if (!m.all_finite()) throw DomainError("expm: non-finite entry");
    const std::size_t n = m.rows();

    const double norm = norm_inf(m);
    int squarings = 0;
    if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    const Matrix x = std::ldexp(1.0, -squarings) * m;

    constexpr double c[] = {1.0,          1.0 / 2.0,     5.0 / 44.0,     1.0 / 66.0,
                            1.0 / 792.0,  1.0 / 15840.0, 1.0 / 665280.0};
    const Matrix eye = Matrix::identity(n);
    const Matrix x2 = x * x;
    const Matrix x4 = x2 * x2;
    const Matrix x6 = x4 * x2;
    const Matrix even = c[0] * eye + c[2] * x2 + c[4] * x4 + c[6] * x6;
    const Matrix odd = x * (c[1] * eye + c[3] * x2 + c[5] * x4);

    Matrix r = solve(even - odd, even + odd);
    for (int i = 0; i < squarings; ++i) r = r * r;
    return r;
}

inline Matrix commutator(const Matrix& a, const Matrix& b) {
    require_square(a, "commutator");
    require_square(b, "commutator");
    if (a.rows() != b.rows()) throw DimensionError("commutator: sizes differ");
    return a * b - b * a;
}

// Logarithmic norm induced by the infinity norm:
// max_i ( m_ii + sum_{j != i} |m_ij| ).
inline double log_norm_inf(const Matrix& m) {
    require_square(m, "log_norm_inf");
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = m(i, i);
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (j != i) s += std::abs(m(i, j));
        best = std::max(best, s);
    }
    return m.rows() == 0 ? 0.0 : best;
}

// Uniform time grid t0 < t0 + tau < ... < t_end.
class TimeGrid {
public:
    TimeGrid(double t0, double t_end, std::size_t n_steps)
        : t0_(t0), t_end_(t_end), n_steps_(n_steps) {
        if (!std::isfinite(t0) || !std::isfinite(t_end) || !(t_end > t0)) {
            throw DomainError("TimeGrid: need finite t0 < t_end");
        }
        if (n_steps == 0) throw DomainError("TimeGrid: n_steps must be positive");
    }

    // Grid on [t0, t_end] with step dt; (t_end - t0) / dt must be an integer
    // up to rounding.
    static TimeGrid with_step(double t0, double t_end, double dt) {
        if (!(dt > 0.0)) throw DomainError("TimeGrid: dt must be positive");
        const double steps = (t_end - t0) / dt;
        const double rounded = std::round(steps);
        if (rounded < 1.0 || std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps)) {
            throw DomainError("TimeGrid: dt does not divide the interval");
        }
        return TimeGrid(t0, t_end, static_cast<std::size_t>(rounded));
    }

    double t0() const noexcept { return t0_; }
    double t_end() const noexcept { return t_end_; }
    std::size_t n_steps() const noexcept { return n_steps_; }
    double step() const noexcept { return (t_end_ - t0_) / static_cast<double>(n_steps_); }
    double time(std::size_t n) const noexcept {
        return n == n_steps_ ? t_end_ : t0_ + static_cast<double>(n) * step();
    }

private:
    double t0_;
    double t_end_;
    std::size_t n_steps_;
};

} // namespace opsplit
