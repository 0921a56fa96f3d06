#include "mks/baseline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "mks/errors.hpp"

namespace mks {

namespace {

constexpr double pivot_tolerance = 1e-10;

const kernels::BasisProfile& cubic_profile() {
    static const auto profile = kernels::BasisProfile::plain_bspline(BSplineOrder(3));
    return profile;
}

struct RowRange {
    std::size_t begin;
    std::size_t count;
};

// Rows of a region-relative column whose channel lies in [center - reach, center + reach].
std::optional<RowRange> support_rows(double center, double reach, double start, std::size_t n_rows) {
    const double lo = std::max(0.0, std::ceil(center - reach - start));
    const double hi = std::min(static_cast<double>(n_rows) - 1.0, std::floor(center + reach - start));
    if (lo > hi) return std::nullopt;
    const auto b = static_cast<std::size_t>(lo);
    return RowRange{b, static_cast<std::size_t>(hi) - b + 1};
}

double column_reach(const KnotGrid& grid) { return cubic_profile().half_width * grid.spacing(); }

}  // namespace

std::vector<double> lsq_centers(const KnotGrid& grid) {
    std::vector<double> centers;
    centers.reserve(grid.size() + 2);
    centers.push_back(grid.first() - grid.spacing());
    centers.insert(centers.end(), grid.positions().begin(), grid.positions().end());
    centers.push_back(grid.last() + grid.spacing());
    return centers;
}

DenseMatrix design_matrix(const Spectrum& spectrum, const KnotGrid& grid, const Region& region,
                          const kernels::KernelSet* kernels) {
    validate_region(region, spectrum);
    const auto& k = kernels::resolve(kernels);
    const auto centers = lsq_centers(grid);
    const double inv_h = 1.0 / grid.spacing();
    const double reach = column_reach(grid);
    const auto start = static_cast<double>(region.start);
    DenseMatrix a(region.n_points(), centers.size());
    for (std::size_t j = 0; j < centers.size(); ++j) {
        // rows outside the column's support stay zero
        const auto rows = support_rows(centers[j], reach, start, a.rows());
        if (!rows) continue;
        k.accumulate_basis(cubic_profile(),
                           {start + static_cast<double>(rows->begin), 1.0, centers[j], inv_h, 1.0},
                           a.column(j).subspan(rows->begin, rows->count));
    }
    return a;
}

BSplineCurve::BSplineCurve(KnotGrid grid, std::vector<double> coefficients)
    : grid_(std::move(grid)), coefficients_(std::move(coefficients)), centers_(lsq_centers(grid_)) {
    if (coefficients_.size() != centers_.size()) {
        throw InvalidInput("expected " + std::to_string(centers_.size()) + " B-spline coefficients, got " +
                           std::to_string(coefficients_.size()));
    }
}

double BSplineCurve::operator()(double x) const noexcept {
    const BSplineOrder cubic(3);
    const double h = grid_.spacing();
    double acc = 0.0;
    for (std::size_t j = 0; j < centers_.size(); ++j) {
        acc += coefficients_[j] * bspline_eval(cubic, (x - centers_[j]) / h);
    }
    return acc;
}

std::vector<double> BSplineCurve::sample(double x0, double dx, std::size_t n,
                                         const kernels::KernelSet* kernels) const {
    const auto& k = kernels::resolve(kernels);
    const double inv_h = 1.0 / grid_.spacing();
    std::vector<double> out(n, 0.0);
    for (std::size_t j = 0; j < centers_.size(); ++j) {
        k.accumulate_basis(cubic_profile(), {x0, dx, centers_[j], inv_h, coefficients_[j]}, out);
    }
    return out;
}

std::vector<double> solve_normal_equations(const DenseMatrix& a, std::span<const double> y,
                                           const kernels::KernelSet* kernels) {
    const auto& k = kernels::resolve(kernels);
    const std::size_t n = a.cols();
    if (y.size() != a.rows()) throw InvalidInput("right-hand side does not match the design matrix rows");
    if (a.rows() < n) {
        throw RankDeficient(std::to_string(n) + " coefficients cannot be determined from " +
                            std::to_string(a.rows()) + " channels");
    }

    // Lower triangle of the normal matrix, row-major, factored in place.
    std::vector<double> g(n * n, 0.0);
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) g[i * n + j] = k.dot(a.column(i), a.column(j));
        rhs[i] = k.dot(a.column(i), y);
    }

    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, g[i * n + i]);
    const double floor = pivot_tolerance * std::max(max_diag, 1e-300);

    for (std::size_t j = 0; j < n; ++j) {
        double* row_j = g.data() + j * n;
        const double d = row_j[j] - k.dot({row_j, j}, {row_j, j});
        if (!(d > floor)) {
            throw RankDeficient("normal matrix is rank deficient at column " + std::to_string(j) +
                                " (too many knots for the data)");
        }
        const double l_jj = std::sqrt(d);
        row_j[j] = l_jj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double* row_i = g.data() + i * n;
            row_i[j] = (row_i[j] - k.dot({row_i, j}, {row_j, j})) / l_jj;
        }
    }

    // L z = rhs, then L^T c = z.
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row_i = g.data() + i * n;
        z[i] = (rhs[i] - k.dot({row_i, i}, {z.data(), i})) / row_i[i];
    }
    std::vector<double> c(n);
    for (std::size_t i = n; i-- > 0;) {
        double acc = z[i];
        for (std::size_t r = i + 1; r < n; ++r) acc -= g[r * n + i] * c[r];
        c[i] = acc / g[i * n + i];
    }
    return c;
}

LsqFit lsq_fit(const Spectrum& spectrum, const KnotGrid& grid, const Region& region,
               const kernels::KernelSet* kernels) {
    const auto& k = kernels::resolve(kernels);
    const DenseMatrix a = design_matrix(spectrum, grid, region, &k);
    const auto y = spectrum.counts().subspan(region.start, region.n_points());
    auto coefficients = solve_normal_equations(a, y, &k);

    std::vector<double> fitted(a.rows(), 0.0);
    const auto centers = lsq_centers(grid);
    for (std::size_t j = 0; j < a.cols(); ++j) {
        const auto rows = support_rows(centers[j], column_reach(grid), static_cast<double>(region.start), a.rows());
        if (!rows) continue;
        const auto col = a.column(j);
        for (std::size_t r = rows->begin; r < rows->begin + rows->count; ++r) fitted[r] += coefficients[j] * col[r];
    }
    const double chi2 = chi_square(spectrum, fitted, region, &k);
    const double ssr = k.squared_distance(y, fitted);
    BSplineCurve curve(grid, coefficients);
    return LsqFit{grid, std::move(coefficients), std::move(curve), std::move(fitted), chi2, ssr};
}

namespace {

template <typename F>
double seconds_of(F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    body();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

BenchReport bench_compare(const Spectrum& spectrum, const Region& region, std::span<const int> levels, int repeats,
                          const kernels::KernelSet* kernels) {
    if (repeats < min_bench_repeats) {
        throw InvalidInput("benchmark needs at least " + std::to_string(min_bench_repeats) + " repeats");
    }
    validate_region(region, spectrum);
    const auto& k = kernels::resolve(kernels);
    const auto basis = ManyKnotBasis::quadric();
    const auto y = spectrum.counts().subspan(region.start, region.n_points());

    BenchReport report;
    report.environment = std::string("kernels=") + std::string(k.name) +
                         "; baseline is fixed-knot linear least squares (dense normal equations, Cholesky) on the "
                         "same grid as the many-knot level, not a free-knot nonlinear fit; times are wall-clock "
                         "medians on a single thread, repeats interleaved across levels";

    // Untimed first pass: statistics, failures, warm caches.
    std::vector<std::optional<KnotGrid>> grids;
    for (int level : levels) {
        BenchEntry entry;
        entry.level = level;
        std::optional<KnotGrid> grid;
        try {
            grid = KnotGrid::at_level(region, level);
            entry.knot_count = grid->size();
            const auto mks = fit_level(spectrum, region, *grid, basis, &k);
            entry.mks_chi2 = mks.chi_square;
            entry.mks_sum_squares = k.squared_distance(y, mks.curve.sample_region(&k));
            const auto lsq = lsq_fit(spectrum, *grid, region, &k);
            entry.lsq_chi2 = lsq.residual_chi_square;
            entry.lsq_sum_squares = lsq.residual_sum_squares;
        } catch (const Error& e) {
            entry.error = e.what();
            grid.reset();
        }
        report.entries.push_back(std::move(entry));
        grids.push_back(std::move(grid));
    }

    // Round-robin over levels so slow drift of the machine hits every level
    // alike instead of whichever level happened to be running.
    std::vector<std::vector<double>> mks_t(grids.size());
    std::vector<std::vector<double>> lsq_t(grids.size());
    for (int r = 0; r < repeats; ++r) {
        for (std::size_t i = 0; i < grids.size(); ++i) {
            if (!grids[i]) continue;
            const KnotGrid& grid = *grids[i];
            mks_t[i].push_back(seconds_of([&] { (void)fit_level(spectrum, region, grid, basis, &k); }));
            lsq_t[i].push_back(seconds_of([&] { (void)lsq_fit(spectrum, grid, region, &k); }));
        }
    }
    for (std::size_t i = 0; i < grids.size(); ++i) {
        if (!grids[i]) continue;
        report.entries[i].mks_seconds = median(std::move(mks_t[i]));
        report.entries[i].lsq_seconds = median(std::move(lsq_t[i]));
    }
    return report;
}

std::optional<double> loglog_slope(std::span<const double> knot_counts, std::span<const double> seconds,
                                   double min_seconds) {
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < std::min(knot_counts.size(), seconds.size()); ++i) {
        if (seconds[i] >= min_seconds && knot_counts[i] > 0.0) {
            lx.push_back(std::log(knot_counts[i]));
            ly.push_back(std::log(seconds[i]));
        }
    }
    if (lx.size() < 2) return std::nullopt;
    const auto n = static_cast<double>(lx.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    if (sxx == 0.0) return std::nullopt;
    return sxy / sxx;
}

}  // namespace mks
