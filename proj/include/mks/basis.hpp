#pragma once

// Centered cardinal B-splines and the many-knot spline bases built from
// symmetric shifted averages of them.
//
//   omega_k(x)            degree-k centered B-spline, support [-(k+1)/2, (k+1)/2]
//   omega_k<l>(x)         (omega_k(x + l) + omega_k(x - l)) / 2, omega_k itself for l = 0
//   q_k(x)                sum_i t_i * omega_k<a_i>(x)
//
// The coefficients t_i are fixed by requiring q_k to interpolate the
// Kronecker delta on the integers, which is what lets a curve be assembled
// from knot values without solving any system.

#include <span>
#include <vector>

namespace mks {

/// Polynomial degree of a centered cardinal B-spline, restricted to 1..3.
class BSplineOrder {
public:
    static constexpr int min_degree = 1;
    static constexpr int max_degree = 3;

    /// Throws InvalidOrder outside [1, 3].
    explicit BSplineOrder(int degree);

    [[nodiscard]] constexpr int degree() const noexcept { return degree_; }
    /// Half width of the support, (k + 1) / 2.
    [[nodiscard]] constexpr double half_width() const noexcept { return 0.5 * (degree_ + 1); }

    friend constexpr bool operator==(BSplineOrder, BSplineOrder) = default;

private:
    int degree_;
};

/// Closed interval [lo, hi] in knot-scale units, symmetric about zero.
struct SupportInterval {
    double lo;
    double hi;

    [[nodiscard]] constexpr bool contains(double x) const noexcept { return x > lo && x < hi; }
    friend constexpr bool operator==(const SupportInterval&, const SupportInterval&) = default;
};

/// Centered cardinal B-spline of degree k; exactly 0 outside its support.
[[nodiscard]] double bspline_eval(BSplineOrder order, double x) noexcept;

/// Symmetric shifted average omega_k<l>(x). Requires l >= 0.
[[nodiscard]] double symmetric_shift_pair(BSplineOrder order, double l, double x) noexcept;

/// Solves the k cardinality conditions q(0) = 1, q(j) = 0 for j = 1..k-1.
/// Throws InvalidInput for a malformed shift vector and DegenerateShifts when
/// the condition matrix is singular.
[[nodiscard]] std::vector<double> derive_coefficients(BSplineOrder order, std::span<const double> shifts);

class ManyKnotBasis {
public:
    /// Validates shapes, shift ordering and cardinality on every integer in
    /// the support (to 1e-10).
    ManyKnotBasis(BSplineOrder order, std::vector<double> shifts, std::vector<double> coeffs);

    /// Builds a basis whose coefficients come from derive_coefficients.
    [[nodiscard]] static ManyKnotBasis derive(BSplineOrder order, std::vector<double> shifts);

    /// The quadric basis: k = 2, shifts (0, 1/2), coefficients (2, -1).
    [[nodiscard]] static ManyKnotBasis quadric();

    [[nodiscard]] BSplineOrder order() const noexcept { return order_; }
    [[nodiscard]] std::span<const double> shifts() const noexcept { return shifts_; }
    [[nodiscard]] std::span<const double> coeffs() const noexcept { return coeffs_; }
    [[nodiscard]] SupportInterval support() const noexcept { return support_; }

    friend bool operator==(const ManyKnotBasis&, const ManyKnotBasis&) = default;

private:
    BSplineOrder order_;
    std::vector<double> shifts_;
    std::vector<double> coeffs_;
    SupportInterval support_;
};

[[nodiscard]] double manyknot_eval(const ManyKnotBasis& basis, double x) noexcept;

/// [-((k+1)/2 + max shift), (k+1)/2 + max shift].
[[nodiscard]] SupportInterval manyknot_support(const ManyKnotBasis& basis) noexcept;

}  // namespace mks
