#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "mks/baseline.hpp"
#include "mks/errors.hpp"
#include "mks/synth.hpp"
#include "oracles.hpp"

using namespace mks;

TEST_CASE("design_matrix") {
    const Spectrum s(std::vector<double>(101, 1.0));
    const Region region{0, 100};
    const auto grid = KnotGrid::at_level(region, 2);  // h = 6.25
    const auto a = design_matrix(s, grid, region);
    REQUIRE(a.rows() == 101);
    REQUIRE(a.cols() == grid.size() + 2);

    SUBCASE("rows sum to one") {
        for (std::size_t r = 0; r < a.rows(); ++r) {
            double sum = 0.0;
            for (std::size_t c = 0; c < a.cols(); ++c) sum += a(r, c);
            CHECK(std::abs(sum - 1.0) < 1e-10);
        }
    }
    SUBCASE("knot-coincident channel carries omega_3(0) = 2/3") {
        const oracle::ConvolvedBSpline conv(3);
        REQUIRE(std::abs(conv(0.0) - 2.0 / 3.0) < 1e-6);
        const auto wide_grid = KnotGrid::at_level(region, 0);  // knots on channels 0, 25, 50, 75, 100
        const auto w = design_matrix(s, wide_grid, region);
        CHECK(w(50, 3) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
        CHECK(w(25, 2) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    }
    SUBCASE("entries outside a column's support are exactly zero") {
        const auto centers = lsq_centers(grid);
        for (std::size_t c = 0; c < a.cols(); ++c) {
            for (std::size_t r = 0; r < a.rows(); ++r) {
                if (std::abs(static_cast<double>(r) - centers[c]) >= 2.0 * grid.spacing()) CHECK(a(r, c) == 0.0);
            }
        }
    }
}

TEST_CASE("lsq_fit") {
    const Region region{0, 200};
    const auto grid = KnotGrid::at_level(region, 3);

    SUBCASE("recovers an exact B-spline combination") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> u(10.0, 500.0);
        std::vector<double> coeffs(grid.size() + 2);
        for (double& c : coeffs) c = u(rng);
        const BSplineCurve truth(grid, coeffs);
        std::vector<double> counts(201);
        for (std::size_t c = 0; c < counts.size(); ++c) counts[c] = truth(static_cast<double>(c));
        const Spectrum s(counts);
        const auto fit = lsq_fit(s, grid, region);
        for (std::size_t c = 0; c < counts.size(); ++c) CHECK(std::abs(fit.fitted[c] - counts[c]) < 1e-6);
        CHECK(fit.residual_sum_squares < 1e-12 * 201 * 500 * 500);
    }
    SUBCASE("constant data stays constant") {
        const Spectrum s(std::vector<double>(201, 37.0));
        const auto fit = lsq_fit(s, grid, region);
        for (double x = 0.0; x <= 200.0; x += 0.05) CHECK(std::abs(fit.curve(x) - 37.0) < 1e-8);
        CHECK(fit.residual_chi_square < 1e-12);
    }
    SUBCASE("too many knots for the data") {
        const Spectrum s(std::vector<double>(9, 3.0));
        const auto dense = KnotGrid::at_level({0, 8}, 3);
        REQUIRE(dense.size() == 33);
        CHECK_THROWS_AS((void)lsq_fit(s, dense, {0, 8}), RankDeficient);
    }
    SUBCASE("residuals are orthogonal to every column") {
        const auto s = synthesize(SynthConfig{});
        const Region r{0, 1023};
        const auto g = KnotGrid::at_level(r, 5);
        const auto fit = lsq_fit(s, g, r);
        const auto a = design_matrix(s, g, r);
        std::vector<double> resid(r.n_points());
        for (std::size_t i = 0; i < resid.size(); ++i) resid[i] = s[i] - fit.fitted[i];
        for (std::size_t c = 0; c < a.cols(); ++c) {
            double d = 0.0;
            for (std::size_t i = 0; i < resid.size(); ++i) d += resid[i] * a(i, c);
            CHECK(std::abs(d) < 1e-6);
        }
    }
    SUBCASE("curve evaluation paths agree") {
        const auto s = synthesize(SynthConfig{});
        const Region r{100, 900};
        const auto fit = lsq_fit(s, KnotGrid::at_level(r, 4), r);
        const auto sampled = fit.curve.sample(100.0, 1.0, r.n_points());
        for (std::size_t i = 0; i < sampled.size(); ++i) {
            CHECK(std::abs(sampled[i] - fit.fitted[i]) < 1e-9);
            CHECK(std::abs(fit.curve(100.0 + static_cast<double>(i)) - fit.fitted[i]) < 1e-9);
        }
    }
}

TEST_CASE("solve_normal_equations on a small system") {
    // Columns (1,1,1) and (0,1,2): fit of y = (1, 3, 5) is exactly 1 + 2t.
    DenseMatrix a(3, 2);
    a(0, 0) = a(1, 0) = a(2, 0) = 1.0;
    a(0, 1) = 0.0;
    a(1, 1) = 1.0;
    a(2, 1) = 2.0;
    const std::vector<double> y{1, 3, 5};
    const auto c = solve_normal_equations(a, y);
    CHECK(c[0] == doctest::Approx(1.0));
    CHECK(c[1] == doctest::Approx(2.0));

    DenseMatrix dup(3, 2);
    for (std::size_t r = 0; r < 3; ++r) dup(r, 0) = dup(r, 1) = 1.0;
    CHECK_THROWS_AS((void)solve_normal_equations(dup, y), RankDeficient);
}

TEST_CASE("bench_compare") {
    SUBCASE("constant spectrum, level 0") {
        const Spectrum s(std::vector<double>(257, 50.0));
        const std::vector<int> levels{0};
        const auto report = bench_compare(s, whole(s), levels, 3);
        REQUIRE(report.entries.size() == 1);
        const auto& e = report.entries[0];
        CHECK_FALSE(e.error);
        CHECK(e.mks_chi2 < 1e-12);
        CHECK(e.lsq_chi2 < 1e-12);
        CHECK(e.mks_seconds > 0.0);
        CHECK(e.lsq_seconds > 0.0);
        CHECK(e.knot_count == 5);
        CHECK(report.environment.find("fixed-knot") != std::string::npos);
    }
    SUBCASE("repeats below three are rejected") {
        const Spectrum s(std::vector<double>(20, 1.0));
        const std::vector<int> levels{0};
        CHECK_THROWS_AS((void)bench_compare(s, whole(s), levels, 2), InvalidInput);
    }
    SUBCASE("failed entries do not abort the report; fits are deterministic") {
        const auto s = synthesize(SynthConfig{});
        const Region r{0, 40};
        const std::vector<int> levels{0, 1, 2, 3, 4};
        const auto a = bench_compare(s, r, levels, 3);
        const auto b = bench_compare(s, r, levels, 3);
        REQUIRE(a.entries.size() == 5);
        CHECK_FALSE(a.entries[2].error);
        CHECK(a.entries[4].error);  // 65 knots + 2 on 41 channels
        for (std::size_t i = 0; i < a.entries.size(); ++i) {
            if (a.entries[i].error) continue;
            CHECK(a.entries[i].mks_chi2 == b.entries[i].mks_chi2);
            CHECK(a.entries[i].lsq_chi2 == b.entries[i].lsq_chi2);
            const double n = static_cast<double>(r.n_points());
            CHECK(a.entries[i].lsq_sum_squares <= a.entries[i].mks_sum_squares + 1e-6 * n);
        }
    }
}

TEST_CASE("loglog_slope") {
    const std::vector<double> knots{5, 9, 17, 33, 65};
    std::vector<double> t1;
    std::vector<double> t2;
    for (double k : knots) {
        t1.push_back(1e-3 * k);
        t2.push_back(1e-4 * k * k);
    }
    CHECK(*loglog_slope(knots, t1) == doctest::Approx(1.0));
    CHECK(*loglog_slope(knots, t2) == doctest::Approx(2.0));
    const std::vector<double> fast{1e-6, 2e-6, 4e-6, 8e-6, 1.6e-5};
    CHECK_FALSE(loglog_slope(knots, fast).has_value());
}
