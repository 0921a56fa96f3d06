#pragma once

// Test-only reference computations. Nothing here calls into the library's
// evaluation paths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace mks::oracle {

/// Centered B-spline of degree k tabulated on a uniform grid by repeated
/// numerical convolution of the unit box (trapezoid rule on the running
/// integral). Accurate to roughly step^2.
class ConvolvedBSpline {
public:
    ConvolvedBSpline(int degree, double step = 1e-4, double half_range = 3.0)
        : step_(step), half_range_(half_range) {
        const auto n = static_cast<std::size_t>(std::llround(2.0 * half_range / step)) + 1;
        std::vector<double> f(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = position(i);
            f[i] = std::abs(x) < 0.5 ? 1.0 : (std::abs(std::abs(x) - 0.5) < 0.5 * step ? 0.5 : 0.0);
        }
        const auto half_window = static_cast<std::size_t>(std::llround(0.5 / step));
        for (int d = 0; d < degree; ++d) {
            // cumulative trapezoid integral
            std::vector<double> cum(n, 0.0);
            for (std::size_t i = 1; i < n; ++i) cum[i] = cum[i - 1] + 0.5 * step * (f[i] + f[i - 1]);
            std::vector<double> g(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t lo = i >= half_window ? i - half_window : 0;
                const std::size_t hi = std::min(n - 1, i + half_window);
                g[i] = cum[hi] - cum[lo];
            }
            f = std::move(g);
        }
        values_ = std::move(f);
    }

    [[nodiscard]] double operator()(double x) const {
        const double t = (x + half_range_) / step_;
        if (t <= 0.0 || t >= static_cast<double>(values_.size() - 1)) return 0.0;
        const auto i = static_cast<std::size_t>(t);
        const double frac = t - static_cast<double>(i);
        return (1.0 - frac) * values_[i] + frac * values_[i + 1];
    }

    /// Trapezoid integral of the tabulated function.
    [[nodiscard]] double integral() const {
        double acc = 0.0;
        for (std::size_t i = 1; i < values_.size(); ++i) acc += 0.5 * step_ * (values_[i] + values_[i - 1]);
        return acc;
    }

private:
    [[nodiscard]] double position(std::size_t i) const { return -half_range_ + static_cast<double>(i) * step_; }

    double step_;
    double half_range_;
    std::vector<double> values_;
};

/// Truncated-power form of the centered B-spline,
///   (1/k!) sum_m (-1)^m C(k+1, m) (y + (k+1)/2 - m)_+^k  with y = -|x|.
/// Evaluated at -|x| so far-away arguments give all-zero terms instead of a
/// cancelling sum; there is no explicit support test.
inline double truncated_power_bspline(int k, double x) {
    const double y = -std::abs(x);
    double binom = 1.0;
    double factorial = 1.0;
    for (int i = 2; i <= k; ++i) factorial *= i;
    double acc = 0.0;
    for (int m = 0; m <= k + 1; ++m) {
        const double t = y + 0.5 * (k + 1) - m;
        if (t > 0.0) acc += (m % 2 == 0 ? 1.0 : -1.0) * binom * std::pow(t, k);
        binom = binom * (k + 1 - m) / (m + 1);
    }
    return acc / factorial;
}

inline double manyknot_value(int k, std::span<const double> shifts, std::span<const double> coeffs, double x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < shifts.size(); ++i) {
        const double pair = shifts[i] == 0.0 ? truncated_power_bspline(k, x)
                                             : 0.5 * (truncated_power_bspline(k, x + shifts[i]) +
                                                      truncated_power_bspline(k, x - shifts[i]));
        acc += coeffs[i] * pair;
    }
    return acc;
}

/// Direct transcription of the quadric basis 2 w(x) - [w(x + 1/2) + w(x - 1/2)] / 2
/// with the closed-form quadratic w.
inline double quadric_closed_form(double x) {
    auto w = [](double t) {
        const double a = std::abs(t);
        if (a <= 0.5) return 0.75 - a * a;
        if (a <= 1.5) return 0.5 * (1.5 - a) * (1.5 - a);
        return 0.0;
    };
    return 2.0 * w(x) - 0.5 * (w(x + 0.5) + w(x - 0.5));
}

/// Naive curve value: every knot (ghosts included), no support test.
inline double naive_curve(int k, std::span<const double> shifts, std::span<const double> coeffs,
                          std::span<const double> positions, std::span<const double> values, double h, double x) {
    double acc = 0.0;
    for (std::size_t j = 0; j < positions.size(); ++j) {
        acc += values[j] * manyknot_value(k, shifts, coeffs, (x - positions[j]) / h);
    }
    return acc;
}

}  // namespace mks::oracle
