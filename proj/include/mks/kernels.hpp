#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference
// implementation and, on x86-64 hosts with AVX2+FMA, a vectorized variant.
// The best available set is chosen once at runtime; the scalar set is
// always reachable so the two can be checked against each other.

#include <array>
#include <span>
#include <string_view>

#include "mks/basis.hpp"

namespace mks::kernels {

/// Flattened description of sum_i t_i * omega_k<a_i>(u). Unlike
/// ManyKnotBasis this carries no cardinality requirement, so a plain
/// B-spline (one term, shift 0, coefficient 1) is expressible too.
struct BasisProfile {
    int degree = 2;
    int terms = 0;
    std::array<double, 3> shifts{};
    std::array<double, 3> coeffs{};
    double half_width = 0.0;  // support radius in knot units

    [[nodiscard]] static BasisProfile from(const ManyKnotBasis& basis) noexcept;
    [[nodiscard]] static BasisProfile plain_bspline(BSplineOrder order) noexcept;
};

/// One evaluation site sequence x_i = x0 + i * dx and one scaled,
/// translated basis function. out[i] += weight * q((x_i - center) * inv_h).
struct Placement {
    double x0;
    double dx;
    double center;
    double inv_h;
    double weight;
};

struct KernelSet {
    std::string_view name;
    void (*accumulate_basis)(const BasisProfile& profile, const Placement& at, std::span<double> out);
    /// sum_i (y_i - s_i)^2 / max(y_i, 1)
    double (*chi_square)(std::span<const double> y, std::span<const double> s);
    double (*squared_distance)(std::span<const double> a, std::span<const double> b);
    double (*dot)(std::span<const double> a, std::span<const double> b);
};

[[nodiscard]] const KernelSet& scalar() noexcept;

/// nullptr when the build or the host lacks AVX2+FMA.
[[nodiscard]] const KernelSet* avx2() noexcept;

/// Best set supported by this host, resolved once.
[[nodiscard]] const KernelSet& active() noexcept;

/// `kernels` when non-null, otherwise active().
[[nodiscard]] inline const KernelSet& resolve(const KernelSet* kernels) noexcept {
    return kernels != nullptr ? *kernels : active();
}

}  // namespace mks::kernels
