#include <algorithm>
#include <cmath>

#include "mks/kernels.hpp"

namespace mks::kernels {

BasisProfile BasisProfile::from(const ManyKnotBasis& basis) noexcept {
    BasisProfile p;
    p.degree = basis.order().degree();
    p.terms = static_cast<int>(basis.shifts().size());
    for (int i = 0; i < p.terms; ++i) {
        p.shifts[i] = basis.shifts()[i];
        p.coeffs[i] = basis.coeffs()[i];
    }
    p.half_width = basis.support().hi;
    return p;
}

BasisProfile BasisProfile::plain_bspline(BSplineOrder order) noexcept {
    BasisProfile p;
    p.degree = order.degree();
    p.terms = 1;
    p.shifts[0] = 0.0;
    p.coeffs[0] = 1.0;
    p.half_width = order.half_width();
    return p;
}

namespace {

void accumulate_basis_scalar(const BasisProfile& profile, const Placement& at, std::span<double> out) {
    const BSplineOrder order(profile.degree);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double u = (at.x0 + static_cast<double>(i) * at.dx - at.center) * at.inv_h;
        if (!(std::abs(u) < profile.half_width)) continue;
        double q = 0.0;
        for (int t = 0; t < profile.terms; ++t) {
            q += profile.coeffs[t] * symmetric_shift_pair(order, profile.shifts[t], u);
        }
        out[i] += at.weight * q;
    }
}

double chi_square_scalar(std::span<const double> y, std::span<const double> s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - s[i];
        acc += r * r / std::max(y[i], 1.0);
    }
    return acc;
}

double squared_distance_scalar(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double r = a[i] - b[i];
        acc += r * r;
    }
    return acc;
}

double dot_scalar(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace

const KernelSet& scalar() noexcept {
    static const KernelSet set{"scalar", accumulate_basis_scalar, chi_square_scalar, squared_distance_scalar,
                               dot_scalar};
    return set;
}

const KernelSet* avx2_if_compiled() noexcept;

const KernelSet* avx2() noexcept {
    static const KernelSet* const set = [] () -> const KernelSet* {
#if defined(__x86_64__) || defined(__i386__)
        if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return avx2_if_compiled();
#endif
        return nullptr;
    }();
    return set;
}

const KernelSet& active() noexcept {
    static const KernelSet& set = avx2() != nullptr ? *avx2() : scalar();
    return set;
}

}  // namespace mks::kernels
