// Compiled with -mavx2 -mfma when MKS_BUILD_AVX2 is set; reached only after
// a runtime CPU check.

#include "mks/kernels.hpp"

#if defined(MKS_BUILD_AVX2)

#include <immintrin.h>


namespace mks::kernels {
namespace {

// Local helpers instead of <algorithm> so no out-of-line template instance
// compiled for AVX2 can be picked up by the linker for other translation units.
inline double max_scalar(double a, double b) { return a < b ? b : a; }

inline __m256d abs_pd(__m256d v) {
    return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Branch-free centered B-spline; lanes outside the support come out as 0.
template <int Degree>
inline __m256d omega(__m256d x) {
    const __m256d a = abs_pd(x);
    const __m256d zero = _mm256_setzero_pd();
    if constexpr (Degree == 1) {
        return _mm256_max_pd(zero, _mm256_sub_pd(_mm256_set1_pd(1.0), a));
    } else if constexpr (Degree == 2) {
        const __m256d inner = _mm256_fnmadd_pd(a, a, _mm256_set1_pd(0.75));
        const __m256d r = _mm256_sub_pd(_mm256_set1_pd(1.5), a);
        const __m256d outer = _mm256_mul_pd(_mm256_set1_pd(0.5), _mm256_mul_pd(r, r));
        const __m256d in_inner = _mm256_cmp_pd(a, _mm256_set1_pd(0.5), _CMP_LT_OQ);
        const __m256d in_support = _mm256_cmp_pd(a, _mm256_set1_pd(1.5), _CMP_LT_OQ);
        return _mm256_and_pd(in_support, _mm256_blendv_pd(outer, inner, in_inner));
    } else {
        const __m256d a2 = _mm256_mul_pd(a, a);
        // 2/3 - a^2 + a^3/2
        const __m256d inner =
            _mm256_add_pd(_mm256_sub_pd(_mm256_set1_pd(2.0 / 3.0), a2), _mm256_mul_pd(_mm256_set1_pd(0.5), _mm256_mul_pd(a2, a)));
        const __m256d r = _mm256_sub_pd(_mm256_set1_pd(2.0), a);
        const __m256d outer = _mm256_div_pd(_mm256_mul_pd(_mm256_mul_pd(r, r), r), _mm256_set1_pd(6.0));
        const __m256d in_inner = _mm256_cmp_pd(a, _mm256_set1_pd(1.0), _CMP_LT_OQ);
        const __m256d in_support = _mm256_cmp_pd(a, _mm256_set1_pd(2.0), _CMP_LT_OQ);
        return _mm256_and_pd(in_support, _mm256_blendv_pd(outer, inner, in_inner));
    }
}

template <int Degree>
inline __m256d profile_value(const BasisProfile& p, __m256d u) {
    __m256d q = _mm256_setzero_pd();
    for (int t = 0; t < p.terms; ++t) {
        __m256d term;
        if (p.shifts[t] == 0.0) {
            term = omega<Degree>(u);
        } else {
            const __m256d l = _mm256_set1_pd(p.shifts[t]);
            term = _mm256_mul_pd(_mm256_set1_pd(0.5),
                                 _mm256_add_pd(omega<Degree>(_mm256_add_pd(u, l)), omega<Degree>(_mm256_sub_pd(u, l))));
        }
        q = _mm256_fmadd_pd(_mm256_set1_pd(p.coeffs[t]), term, q);
    }
    return q;
}

template <int Degree>
void accumulate_impl(const BasisProfile& p, const Placement& at, std::span<double> out) {
    const std::size_t n = out.size();
    const __m256d lane = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
    const __m256d dx = _mm256_set1_pd(at.dx);
    const __m256d x0 = _mm256_set1_pd(at.x0);
    const __m256d center = _mm256_set1_pd(at.center);
    const __m256d inv_h = _mm256_set1_pd(at.inv_h);
    const __m256d weight = _mm256_set1_pd(at.weight);
    const __m256d hw = _mm256_set1_pd(p.half_width);

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d idx = _mm256_add_pd(_mm256_set1_pd(static_cast<double>(i)), lane);
        const __m256d x = _mm256_fmadd_pd(idx, dx, x0);
        const __m256d u = _mm256_mul_pd(_mm256_sub_pd(x, center), inv_h);
        const __m256d inside = _mm256_cmp_pd(abs_pd(u), hw, _CMP_LT_OQ);
        if (_mm256_movemask_pd(inside) == 0) continue;
        const __m256d q = _mm256_and_pd(inside, profile_value<Degree>(p, u));
        _mm256_storeu_pd(out.data() + i, _mm256_fmadd_pd(weight, q, _mm256_loadu_pd(out.data() + i)));
    }
    if (i < n) {
        alignas(32) double tail[4] = {0.0, 0.0, 0.0, 0.0};
        const std::size_t rem = n - i;
        for (std::size_t j = 0; j < rem; ++j) tail[j] = out[i + j];
        const __m256d idx = _mm256_add_pd(_mm256_set1_pd(static_cast<double>(i)), lane);
        const __m256d x = _mm256_fmadd_pd(idx, dx, x0);
        const __m256d u = _mm256_mul_pd(_mm256_sub_pd(x, center), inv_h);
        const __m256d inside = _mm256_cmp_pd(abs_pd(u), hw, _CMP_LT_OQ);
        const __m256d q = _mm256_and_pd(inside, profile_value<Degree>(p, u));
        _mm256_store_pd(tail, _mm256_fmadd_pd(weight, q, _mm256_load_pd(tail)));
        for (std::size_t j = 0; j < rem; ++j) out[i + j] = tail[j];
    }
}

void accumulate_basis_avx2(const BasisProfile& p, const Placement& at, std::span<double> out) {
    switch (p.degree) {
        case 1: accumulate_impl<1>(p, at, out); break;
        case 2: accumulate_impl<2>(p, at, out); break;
        case 3: accumulate_impl<3>(p, at, out); break;
        default: break;
    }
}

double chi_square_avx2(std::span<const double> y, std::span<const double> s) {
    const std::size_t n = y.size();
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d y0 = _mm256_loadu_pd(y.data() + i);
        const __m256d y1 = _mm256_loadu_pd(y.data() + i + 4);
        const __m256d r0 = _mm256_sub_pd(y0, _mm256_loadu_pd(s.data() + i));
        const __m256d r1 = _mm256_sub_pd(y1, _mm256_loadu_pd(s.data() + i + 4));
        acc0 = _mm256_add_pd(acc0, _mm256_div_pd(_mm256_mul_pd(r0, r0), _mm256_max_pd(y0, one)));
        acc1 = _mm256_add_pd(acc1, _mm256_div_pd(_mm256_mul_pd(r1, r1), _mm256_max_pd(y1, one)));
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        const double r = y[i] - s[i];
        acc += r * r / max_scalar(y[i], 1.0);
    }
    return acc;
}

double squared_distance_avx2(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d r0 = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i));
        const __m256d r1 = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i + 4), _mm256_loadu_pd(b.data() + i + 4));
        acc0 = _mm256_fmadd_pd(r0, r0, acc0);
        acc1 = _mm256_fmadd_pd(r1, r1, acc1);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        const double r = a[i] - b[i];
        acc += r * r;
    }
    return acc;
}

double dot_avx2(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i + 4), _mm256_loadu_pd(b.data() + i + 4), acc1);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace

const KernelSet* avx2_if_compiled() noexcept {
    static const KernelSet set{"avx2", accumulate_basis_avx2, chi_square_avx2, squared_distance_avx2, dot_avx2};
    return &set;
}

}  // namespace mks::kernels

#else

namespace mks::kernels {
const KernelSet* avx2_if_compiled() noexcept { return nullptr; }
}  // namespace mks::kernels

#endif
