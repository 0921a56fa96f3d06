#include "mks/basis.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "mks/errors.hpp"

namespace mks {

BSplineOrder::BSplineOrder(int degree) : degree_(degree) {
    if (degree < min_degree || degree > max_degree) {
        throw InvalidOrder("B-spline degree must be in [1, 3], got " + std::to_string(degree));
    }
}

double bspline_eval(BSplineOrder order, double x) noexcept {
    const double a = std::abs(x);
    switch (order.degree()) {
        case 1:
            return a < 1.0 ? 1.0 - a : 0.0;
        case 2:
            if (a < 0.5) return 0.75 - a * a;
            if (a < 1.5) {
                const double r = 1.5 - a;
                return 0.5 * r * r;
            }
            return 0.0;
        case 3:
            if (a < 1.0) return 2.0 / 3.0 - a * a + 0.5 * a * a * a;
            if (a < 2.0) {
                const double r = 2.0 - a;
                return r * r * r / 6.0;
            }
            return 0.0;
        default:
            return 0.0;
    }
}

double symmetric_shift_pair(BSplineOrder order, double l, double x) noexcept {
    if (l == 0.0) return bspline_eval(order, x);
    return 0.5 * (bspline_eval(order, x + l) + bspline_eval(order, x - l));
}

namespace {

void check_shift_shape(BSplineOrder order, std::span<const double> shifts) {
    const auto k = static_cast<std::size_t>(order.degree());
    if (shifts.size() != k) {
        throw InvalidInput("expected " + std::to_string(k) + " shifts, got " + std::to_string(shifts.size()));
    }
    if (shifts[0] != 0.0) throw InvalidInput("first shift must be 0");
    for (double a : shifts) {
        if (!(a >= 0.0) || !std::isfinite(a)) throw InvalidInput("shifts must be finite and nonnegative");
    }
}

// Dense Gaussian elimination with partial pivoting; k <= 3.
std::vector<double> solve_small(std::vector<std::vector<double>> m, std::vector<double> rhs) {
    const std::size_t n = rhs.size();
    double scale = 0.0;
    for (const auto& row : m)
        for (double v : row) scale = std::max(scale, std::abs(v));
    const double tiny = 1e-12 * std::max(scale, 1.0);

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        }
        if (std::abs(m[pivot][col]) <= tiny) {
            throw DegenerateShifts("cardinality conditions are singular for this shift vector");
        }
        std::swap(m[col], m[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = m[r][col] / m[col][col];
            for (std::size_t c = col; c < n; ++c) m[r][c] -= f * m[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double acc = rhs[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= m[i][c] * x[c];
        x[i] = acc / m[i][i];
    }
    return x;
}

SupportInterval support_for(BSplineOrder order, std::span<const double> shifts) noexcept {
    const double widest = shifts.empty() ? 0.0 : *std::max_element(shifts.begin(), shifts.end());
    const double hw = order.half_width() + widest;
    return {-hw, hw};
}

}  // namespace

std::vector<double> derive_coefficients(BSplineOrder order, std::span<const double> shifts) {
    check_shift_shape(order, shifts);
    const auto k = static_cast<std::size_t>(order.degree());
    std::vector<std::vector<double>> m(k, std::vector<double>(k));
    std::vector<double> rhs(k, 0.0);
    rhs[0] = 1.0;
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < k; ++i) {
            m[j][i] = symmetric_shift_pair(order, shifts[i], static_cast<double>(j));
        }
    }
    return solve_small(std::move(m), std::move(rhs));
}

ManyKnotBasis::ManyKnotBasis(BSplineOrder order, std::vector<double> shifts, std::vector<double> coeffs)
    : order_(order), shifts_(std::move(shifts)), coeffs_(std::move(coeffs)), support_{} {
    check_shift_shape(order_, shifts_);
    if (coeffs_.size() != shifts_.size()) throw InvalidInput("coefficient and shift counts differ");
    for (std::size_t i = 1; i < shifts_.size(); ++i) {
        if (!(shifts_[i] > shifts_[i - 1])) throw InvalidInput("shifts must be strictly increasing");
    }
    for (double t : coeffs_) {
        if (!std::isfinite(t)) throw InvalidInput("coefficients must be finite");
    }
    support_ = support_for(order_, shifts_);

    const auto reach = static_cast<int>(std::ceil(support_.hi));
    for (int j = -reach; j <= reach; ++j) {
        const double expected = j == 0 ? 1.0 : 0.0;
        if (std::abs(manyknot_eval(*this, j) - expected) > 1e-10) {
            throw InvalidInput("basis is not cardinal at integer " + std::to_string(j));
        }
    }
}

ManyKnotBasis ManyKnotBasis::derive(BSplineOrder order, std::vector<double> shifts) {
    auto coeffs = derive_coefficients(order, shifts);
    return ManyKnotBasis(order, std::move(shifts), std::move(coeffs));
}

ManyKnotBasis ManyKnotBasis::quadric() {
    return ManyKnotBasis(BSplineOrder(2), {0.0, 0.5}, {2.0, -1.0});
}

double manyknot_eval(const ManyKnotBasis& basis, double x) noexcept {
    const SupportInterval s = basis.support();
    if (!s.contains(x)) return 0.0;
    const auto shifts = basis.shifts();
    const auto coeffs = basis.coeffs();
    double acc = 0.0;
    for (std::size_t i = 0; i < shifts.size(); ++i) {
        acc += coeffs[i] * symmetric_shift_pair(basis.order(), shifts[i], x);
    }
    return acc;
}

SupportInterval manyknot_support(const ManyKnotBasis& basis) noexcept {
    return support_for(basis.order(), basis.shifts());
}

}  // namespace mks
