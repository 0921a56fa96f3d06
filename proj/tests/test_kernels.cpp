#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "mks/basis.hpp"
#include "mks/kernels.hpp"

using namespace mks;
using namespace mks::kernels;

namespace {

std::vector<BasisProfile> profiles() {
    return {
        BasisProfile::from(ManyKnotBasis::quadric()),
        BasisProfile::from(ManyKnotBasis::derive(BSplineOrder(1), {0.0})),
        BasisProfile::from(ManyKnotBasis::derive(BSplineOrder(3), {0.0, 0.25, 0.75})),
        BasisProfile::plain_bspline(BSplineOrder(3)),
        BasisProfile::plain_bspline(BSplineOrder(2)),
    };
}

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

}  // namespace

TEST_CASE("active kernel set is resolved") {
    const auto& a = active();
    CHECK((a.name == "scalar" || a.name == "avx2"));
    if (avx2() != nullptr) CHECK(a.name == "avx2");
    CHECK(&resolve(&scalar()) == &scalar());
}

TEST_CASE("scalar accumulate matches direct basis evaluation") {
    const auto q2 = ManyKnotBasis::quadric();
    const auto profile = BasisProfile::from(q2);
    std::vector<double> out(300, 1.0);
    const Placement at{-10.0, 0.1, 3.3, 1.0 / 2.5, 4.0};
    scalar().accumulate_basis(profile, at, out);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double x = at.x0 + static_cast<double>(i) * at.dx;
        CHECK(out[i] == doctest::Approx(1.0 + 4.0 * manyknot_eval(q2, (x - 3.3) / 2.5)).epsilon(1e-13));
    }
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
    const KernelSet* simd = avx2();
    if (simd == nullptr) {
        MESSAGE("AVX2 not available on this host; equivalence skipped");
        return;
    }
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    SUBCASE("accumulate_basis") {
        for (const auto& p : profiles()) {
            for (int trial = 0; trial < 200; ++trial) {
                const std::size_t n = 1 + static_cast<std::size_t>(rng() % 203);
                const Placement at{50.0 * u(rng), 0.5 + std::abs(u(rng)), 20.0 * u(rng),
                                   1.0 / (0.3 + 8.0 * std::abs(u(rng))), 100.0 * u(rng)};
                auto base = random_vector(rng, n, -5.0, 5.0);
                auto a = base;
                auto b = base;
                scalar().accumulate_basis(p, at, a);
                simd->accumulate_basis(p, at, b);
                for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12 * (1.0 + std::abs(a[i])));
            }
        }
    }
    SUBCASE("support edges are exact zeros in both") {
        const auto p = BasisProfile::from(ManyKnotBasis::quadric());
        std::vector<double> a(5, 0.0);
        std::vector<double> b(5, 0.0);
        const Placement at{-4.0, 2.0, 0.0, 1.0, 1.0};  // -4, -2, 0, 2, 4
        scalar().accumulate_basis(p, at, a);
        simd->accumulate_basis(p, at, b);
        CHECK(a == std::vector<double>{0.0, 0.0, 1.0, 0.0, 0.0});
        CHECK(b == a);
    }
    SUBCASE("reductions") {
        for (std::size_t n : {0u, 1u, 3u, 7u, 8u, 9u, 64u, 1023u, 4096u}) {
            const auto y = random_vector(rng, n, 0.0, 500.0);
            const auto s = random_vector(rng, n, 0.0, 500.0);
            const double chi_ref = scalar().chi_square(y, s);
            CHECK(simd->chi_square(y, s) == doctest::Approx(chi_ref).epsilon(1e-12));
            CHECK(simd->dot(y, s) == doctest::Approx(scalar().dot(y, s)).epsilon(1e-12));
            CHECK(simd->squared_distance(y, s) == doctest::Approx(scalar().squared_distance(y, s)).epsilon(1e-12));
        }
    }
}

TEST_CASE("chi-square kernel floors sigma at one") {
    const std::vector<double> y{0.0, 4.0};
    const std::vector<double> s{1.0, 2.0};
    CHECK(scalar().chi_square(y, s) == 2.0);
}
