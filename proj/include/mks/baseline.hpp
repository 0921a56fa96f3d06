#pragma once

// Fixed-knot cubic B-spline least squares, the reference smoother the
// many-knot method is compared against, and the timing harness that puts
// the two side by side on identical grids.
//
// The solve is deliberately plain: a dense design matrix, a dense normal
// matrix and an in-repo Cholesky factorization. The normal matrix is banded
// (bandwidth 3) and a banded factorization would be far cheaper; that is
// left out so the baseline reflects a general least-squares solve.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mks/fitter.hpp"
#include "mks/kernels.hpp"
#include "mks/spectrum.hpp"

namespace mks {

/// Column-major dense matrix.
class DenseMatrix {
public:
    DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] double& operator()(std::size_t r, std::size_t c) noexcept { return data_[c * rows_ + r]; }
    [[nodiscard]] double operator()(std::size_t r, std::size_t c) const noexcept { return data_[c * rows_ + r]; }
    [[nodiscard]] std::span<double> column(std::size_t c) noexcept { return {data_.data() + c * rows_, rows_}; }
    [[nodiscard]] std::span<const double> column(std::size_t c) const noexcept {
        return {data_.data() + c * rows_, rows_};
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

/// Cubic B-spline centers of the baseline: the grid plus one extra knot on
/// each side, K + 2 in total.
[[nodiscard]] std::vector<double> lsq_centers(const KnotGrid& grid);

/// Rows are the region channels, columns the h-scaled cubic B-splines on
/// lsq_centers(grid).
[[nodiscard]] DenseMatrix design_matrix(const Spectrum& spectrum, const KnotGrid& grid, const Region& region,
                                        const kernels::KernelSet* kernels = nullptr);

/// sum_j coefficients[j] * omega_3((x - centers[j]) / h)
class BSplineCurve {
public:
    BSplineCurve(KnotGrid grid, std::vector<double> coefficients);

    [[nodiscard]] const KnotGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::span<const double> coefficients() const noexcept { return coefficients_; }
    [[nodiscard]] double operator()(double x) const noexcept;
    [[nodiscard]] std::vector<double> sample(double x0, double dx, std::size_t n,
                                             const kernels::KernelSet* kernels = nullptr) const;

private:
    KnotGrid grid_;
    std::vector<double> coefficients_;
    std::vector<double> centers_;
};

struct LsqFit {
    KnotGrid grid;
    std::vector<double> coefficients;
    BSplineCurve curve;
    /// Fitted values on the region channels.
    std::vector<double> fitted;
    /// Same sigma model as the many-knot chi-square.
    double residual_chi_square;
    /// Unweighted sum of squared residuals, the quantity the solve minimizes.
    double residual_sum_squares;
};

/// Solves A^T A c = A^T y by Cholesky. Throws RankDeficient when the normal
/// matrix is not numerically positive definite.
[[nodiscard]] std::vector<double> solve_normal_equations(const DenseMatrix& a, std::span<const double> y,
                                                         const kernels::KernelSet* kernels = nullptr);

[[nodiscard]] LsqFit lsq_fit(const Spectrum& spectrum, const KnotGrid& grid, const Region& region,
                             const kernels::KernelSet* kernels = nullptr);

struct BenchEntry {
    int level = 0;
    std::size_t knot_count = 0;
    double mks_seconds = 0.0;
    double lsq_seconds = 0.0;
    double mks_chi2 = 0.0;
    double lsq_chi2 = 0.0;
    double mks_sum_squares = 0.0;
    double lsq_sum_squares = 0.0;
    /// Set when either fit failed for this level; the timings and statistics
    /// of the failed side are then meaningless.
    std::optional<std::string> error;
};

struct BenchReport {
    std::vector<BenchEntry> entries;
    std::string environment;
};

inline constexpr int min_bench_repeats = 3;

/// Times fit_level and lsq_fit on the same grid for each level (median
/// wall-clock of `repeats` runs, strictly sequential, one round over all
/// levels per repeat).
[[nodiscard]] BenchReport bench_compare(const Spectrum& spectrum, const Region& region, std::span<const int> levels,
                                        int repeats, const kernels::KernelSet* kernels = nullptr);

/// Least-squares slope of log(time) against log(knot_count), ignoring
/// entries whose time is below min_seconds. Empty with fewer than 2 points.
[[nodiscard]] std::optional<double> loglog_slope(std::span<const double> knot_counts, std::span<const double> seconds,
                                                 double min_seconds = 1e-4);

}  // namespace mks
