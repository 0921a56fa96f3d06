#pragma once

// Multiresolution many-knot smoothing.
//
// Level 0 places 5 equally spaced knots over the region; every further level
// inserts the midpoints of the previous one (5, 9, 17, ... knots) until the
// spacing reaches one channel. At each level the knot values are local
// window means of the counts and the curve is the superposition of scaled,
// translated many-knot bases, so no linear system is ever solved. The level
// reported as the fit is the coarsest one whose chi-square does not exceed
// the number of channels in the region.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mks/basis.hpp"
#include "mks/kernels.hpp"
#include "mks/spectrum.hpp"

namespace mks {

class KnotGrid {
public:
    /// Grid with 4 * 2^level + 1 equally spaced knots spanning the region.
    /// Throws InvalidRegion for an unusable region.
    [[nodiscard]] static KnotGrid at_level(const Region& region, int level);

    [[nodiscard]] int level() const noexcept { return level_; }
    [[nodiscard]] double spacing() const noexcept { return spacing_; }
    [[nodiscard]] std::span<const double> positions() const noexcept { return positions_; }
    [[nodiscard]] std::size_t size() const noexcept { return positions_.size(); }
    [[nodiscard]] double first() const noexcept { return positions_.front(); }
    [[nodiscard]] double last() const noexcept { return positions_.back(); }

    friend bool operator==(const KnotGrid&, const KnotGrid&) = default;

private:
    KnotGrid(int level, double start, double end);

    int level_;
    double spacing_;
    std::vector<double> positions_;
};

[[nodiscard]] KnotGrid initial_grid(const Region& region);

/// Next level. Throws CannotRefine once spacing <= 1 channel.
[[nodiscard]] KnotGrid refine_grid(const KnotGrid& grid);

/// Mean of the counts on channels c with |c - p| <= h/2 (clipped to the
/// region) for every knot p; the nearest channel stands in when that window
/// holds no channel.
[[nodiscard]] std::vector<double> knot_averages(const Spectrum& spectrum, const KnotGrid& grid, const Region& region);

/// Same windows for an arbitrary set of knot positions with spacing h.
[[nodiscard]] std::vector<double> knot_averages(const Spectrum& spectrum, std::span<const double> positions,
                                                double spacing, const Region& region);

class SmoothCurve {
public:
    SmoothCurve(KnotGrid grid, std::vector<double> knot_values, ManyKnotBasis basis, Region region);

    [[nodiscard]] const KnotGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::span<const double> knot_values() const noexcept { return knot_values_; }
    [[nodiscard]] const ManyKnotBasis& basis() const noexcept { return basis_; }
    [[nodiscard]] const Region& region() const noexcept { return region_; }

    /// Knot positions and values including the clamped ghost knots beyond
    /// each region edge.
    [[nodiscard]] std::span<const double> extended_positions() const noexcept { return ext_positions_; }
    [[nodiscard]] std::span<const double> extended_values() const noexcept { return ext_values_; }
    [[nodiscard]] std::size_t ghosts_per_side() const noexcept { return ghosts_; }

    /// Point evaluation.
    [[nodiscard]] double operator()(double x) const noexcept;

    /// Values at x0 + i * dx for i in [0, n), summing every basis function
    /// over the whole sample range.
    [[nodiscard]] std::vector<double> sample(double x0, double dx, std::size_t n,
                                             const kernels::KernelSet* kernels = nullptr) const;

    /// Values at every channel of the region.
    [[nodiscard]] std::vector<double> sample_region(const kernels::KernelSet* kernels = nullptr) const;

private:
    KnotGrid grid_;
    std::vector<double> knot_values_;
    ManyKnotBasis basis_;
    Region region_;
    std::size_t ghosts_;
    std::vector<double> ext_positions_;
    std::vector<double> ext_values_;
};

/// Throws InvalidInput if values and grid sizes differ.
[[nodiscard]] SmoothCurve construct_curve(const KnotGrid& grid, std::vector<double> values,
                                          const ManyKnotBasis& basis, const Region& region);

/// sum over region channels of ((y - s) / sigma)^2 with sigma = sqrt(max(y, 1)).
[[nodiscard]] double chi_square(const Spectrum& spectrum, const SmoothCurve& curve, const Region& region,
                                const kernels::KernelSet* kernels = nullptr);

/// Same statistic from curve values already sampled on the region channels.
[[nodiscard]] double chi_square(const Spectrum& spectrum, std::span<const double> curve_on_region,
                                const Region& region, const kernels::KernelSet* kernels = nullptr);

struct LevelRecord {
    int level;
    std::size_t knot_count;
    double chi_square;
    SmoothCurve curve;
};

/// Index of the coarsest entry with chi_square <= threshold, otherwise the
/// last entry. Requires a nonempty input.
[[nodiscard]] std::size_t select_level(std::span<const double> chi_squares, double threshold);

struct FitResult {
    std::vector<LevelRecord> levels;
    int selected_level = 0;
    std::size_t n_points = 0;
    double criterion_threshold = 0.0;

    [[nodiscard]] const LevelRecord& selected() const;
};

struct FitOptions {
    /// Stop refining once a level meets the criterion instead of computing
    /// every level down to unit spacing.
    bool stop_at_criterion = false;
    const kernels::KernelSet* kernels = nullptr;
};

/// Averages, curve and chi-square for one grid.
[[nodiscard]] LevelRecord fit_level(const Spectrum& spectrum, const Region& region, const KnotGrid& grid,
                                    const ManyKnotBasis& basis, const kernels::KernelSet* kernels = nullptr);

[[nodiscard]] FitResult fit(const Spectrum& spectrum, const Region& region, const ManyKnotBasis& basis,
                            const FitOptions& options = {});

/// Root mean square of a - b.
[[nodiscard]] double rms_difference(std::span<const double> a, std::span<const double> b,
                                    const kernels::KernelSet* kernels = nullptr);

}  // namespace mks
