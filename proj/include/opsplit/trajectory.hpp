#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "opsplit/errors.hpp"
#include "opsplit/linalg.hpp"

namespace opsplit {

struct StepRecord {
    double t = 0.0;
    Vector state;
    // 0 for non-iterative schemes.
    int iterations_used = 0;
    bool converged = true;
};

// One record per grid time, starting with the initial state.
using Trajectory = std::vector<StepRecord>;

// States sampled on equispaced nodes t_begin + k h, k = 0..size()-1, with
// piecewise linear interpolation between nodes.
class NodalTrajectory {
public:
    NodalTrajectory(double t_begin, double spacing, std::vector<Vector> values)
        : t_begin_(t_begin), spacing_(spacing), values_(std::move(values)) {
        if (values_.empty()) throw DimensionError("NodalTrajectory: no nodes");
        if (values_.size() > 1 && !(spacing_ > 0.0)) {
            throw DomainError("NodalTrajectory: node spacing must be positive");
        }
    }

    std::size_t size() const noexcept { return values_.size(); }
    double spacing() const noexcept { return spacing_; }
    double t_begin() const noexcept { return t_begin_; }
    double t_end() const noexcept {
        return t_begin_ + spacing_ * static_cast<double>(values_.size() - 1);
    }
    double time(std::size_t k) const noexcept {
        return t_begin_ + spacing_ * static_cast<double>(k);
    }
    const Vector& node(std::size_t k) const { return values_.at(k); }
    const std::vector<Vector>& nodes() const noexcept { return values_; }

    bool covers(double a, double b) const noexcept {
        const double slack = 1e-12 * std::max(1.0, std::abs(t_end()));
        return a >= t_begin_ - slack && b <= t_end() + slack && a <= b;
    }

    Vector at(double t) const {
        if (!covers(t, t)) {
            throw DomainError("NodalTrajectory: time " + std::to_string(t) +
                              " outside [" + std::to_string(t_begin_) + ", " +
                              std::to_string(t_end()) + "]");
        }
        if (values_.size() == 1) return values_.front();
        const double x = (t - t_begin_) / spacing_;
        const double last = static_cast<double>(values_.size() - 1);
        if (x <= 0.0) return values_.front();
        if (x >= last) return values_.back();
        const auto k = static_cast<std::size_t>(std::floor(x));
        const double frac = x - static_cast<double>(k);
        if (frac == 0.0) return values_[k];
        Vector out = (1.0 - frac) * values_[k];
        out.axpy(frac, values_[k + 1]);
        return out;
    }

private:
    double t_begin_;
    double spacing_;
    std::vector<Vector> values_;
};

} // namespace opsplit
