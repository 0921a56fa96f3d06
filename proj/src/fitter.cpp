#include "mks/fitter.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "mks/errors.hpp"

namespace mks {

namespace {
constexpr int max_level = 30;
constexpr double window_slack = 1e-9;
}  // namespace

KnotGrid::KnotGrid(int level, double start, double end) : level_(level), spacing_(0.0) {
    const std::size_t intervals = std::size_t{4} << level;
    spacing_ = (end - start) / static_cast<double>(intervals);
    positions_.resize(intervals + 1);
    for (std::size_t i = 0; i < intervals; ++i) positions_[i] = start + static_cast<double>(i) * spacing_;
    positions_.back() = end;
}

KnotGrid KnotGrid::at_level(const Region& region, int level) {
    validate_region(region);
    if (level < 0 || level > max_level) {
        throw InvalidInput("grid level must be in [0, " + std::to_string(max_level) + "], got " +
                           std::to_string(level));
    }
    return KnotGrid(level, static_cast<double>(region.start), static_cast<double>(region.end));
}

KnotGrid initial_grid(const Region& region) { return KnotGrid::at_level(region, 0); }

KnotGrid refine_grid(const KnotGrid& grid) {
    if (!(grid.spacing() > 1.0)) {
        throw CannotRefine("knot spacing " + std::to_string(grid.spacing()) + " has already reached one channel");
    }
    if (grid.level() >= max_level) throw CannotRefine("maximum refinement level reached");
    return KnotGrid::at_level(Region{static_cast<std::size_t>(grid.first()), static_cast<std::size_t>(grid.last())},
                              grid.level() + 1);
}

std::vector<double> knot_averages(const Spectrum& spectrum, const KnotGrid& grid, const Region& region) {
    return knot_averages(spectrum, grid.positions(), grid.spacing(), region);
}

std::vector<double> knot_averages(const Spectrum& spectrum, std::span<const double> positions, double spacing,
                                  const Region& region) {
    validate_region(region, spectrum);
    if (!(spacing > 0.0)) throw InvalidInput("knot spacing must be positive");
    const auto counts = spectrum.counts();
    const double half = 0.5 * spacing;
    const auto first = static_cast<double>(region.start);
    const auto last = static_cast<double>(region.end);

    std::vector<double> values;
    values.reserve(positions.size());
    for (double p : positions) {
        const double lo = std::max(first, std::ceil(p - half - window_slack));
        const double hi = std::min(last, std::floor(p + half + window_slack));
        if (lo > hi) {
            const double nearest = std::clamp(std::round(p), first, last);
            values.push_back(counts[static_cast<std::size_t>(nearest)]);
            continue;
        }
        double sum = 0.0;
        const auto b = static_cast<std::size_t>(lo);
        const auto e = static_cast<std::size_t>(hi);
        for (std::size_t c = b; c <= e; ++c) sum += counts[c];
        values.push_back(sum / static_cast<double>(e - b + 1));
    }
    return values;
}

SmoothCurve::SmoothCurve(KnotGrid grid, std::vector<double> knot_values, ManyKnotBasis basis, Region region)
    : grid_(std::move(grid)),
      knot_values_(std::move(knot_values)),
      basis_(std::move(basis)),
      region_(region),
      ghosts_(0) {
    if (knot_values_.size() != grid_.size()) {
        throw InvalidInput("expected " + std::to_string(grid_.size()) + " knot values, got " +
                           std::to_string(knot_values_.size()));
    }
    // Enough clamped ghosts that every point of the region sees a full set
    // of overlapping bases.
    ghosts_ = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(basis_.support().hi)));
    const double h = grid_.spacing();
    const std::size_t n = grid_.size();
    ext_positions_.reserve(n + 2 * ghosts_);
    ext_values_.reserve(n + 2 * ghosts_);
    for (std::size_t g = ghosts_; g > 0; --g) {
        ext_positions_.push_back(grid_.first() - static_cast<double>(g) * h);
        ext_values_.push_back(knot_values_.front());
    }
    ext_positions_.insert(ext_positions_.end(), grid_.positions().begin(), grid_.positions().end());
    ext_values_.insert(ext_values_.end(), knot_values_.begin(), knot_values_.end());
    for (std::size_t g = 1; g <= ghosts_; ++g) {
        ext_positions_.push_back(grid_.last() + static_cast<double>(g) * h);
        ext_values_.push_back(knot_values_.back());
    }
}

double SmoothCurve::operator()(double x) const noexcept {
    const double h = grid_.spacing();
    double acc = 0.0;
    for (std::size_t j = 0; j < ext_positions_.size(); ++j) {
        acc += ext_values_[j] * manyknot_eval(basis_, (x - ext_positions_[j]) / h);
    }
    return acc;
}

std::vector<double> SmoothCurve::sample(double x0, double dx, std::size_t n, const kernels::KernelSet* kernels) const {
    const auto& k = kernels::resolve(kernels);
    const auto profile = kernels::BasisProfile::from(basis_);
    const double inv_h = 1.0 / grid_.spacing();
    std::vector<double> out(n, 0.0);
    for (std::size_t j = 0; j < ext_positions_.size(); ++j) {
        k.accumulate_basis(profile, {x0, dx, ext_positions_[j], inv_h, ext_values_[j]}, out);
    }
    return out;
}

std::vector<double> SmoothCurve::sample_region(const kernels::KernelSet* kernels) const {
    return sample(static_cast<double>(region_.start), 1.0, region_.n_points(), kernels);
}

SmoothCurve construct_curve(const KnotGrid& grid, std::vector<double> values, const ManyKnotBasis& basis,
                            const Region& region) {
    return SmoothCurve(grid, std::move(values), basis, region);
}

double chi_square(const Spectrum& spectrum, std::span<const double> curve_on_region, const Region& region,
                  const kernels::KernelSet* kernels) {
    validate_region(region, spectrum);
    if (curve_on_region.size() != region.n_points()) {
        throw InvalidInput("curve samples do not match the region length");
    }
    return kernels::resolve(kernels).chi_square(spectrum.counts().subspan(region.start, region.n_points()),
                                                curve_on_region);
}

double chi_square(const Spectrum& spectrum, const SmoothCurve& curve, const Region& region,
                  const kernels::KernelSet* kernels) {
    const auto s = curve.sample(static_cast<double>(region.start), 1.0, region.n_points(), kernels);
    return chi_square(spectrum, s, region, kernels);
}

std::size_t select_level(std::span<const double> chi_squares, double threshold) {
    if (chi_squares.empty()) throw InvalidInput("no levels to select from");
    for (std::size_t i = 0; i < chi_squares.size(); ++i) {
        if (chi_squares[i] <= threshold) return i;
    }
    return chi_squares.size() - 1;
}

const LevelRecord& FitResult::selected() const {
    for (const auto& rec : levels) {
        if (rec.level == selected_level) return rec;
    }
    throw InvalidInput("selected level " + std::to_string(selected_level) + " is not in the record");
}

LevelRecord fit_level(const Spectrum& spectrum, const Region& region, const KnotGrid& grid,
                      const ManyKnotBasis& basis, const kernels::KernelSet* kernels) {
    auto values = knot_averages(spectrum, grid, region);
    SmoothCurve curve(grid, std::move(values), basis, region);
    const double chi2 = chi_square(spectrum, curve, region, kernels);
    return LevelRecord{grid.level(), grid.size(), chi2, std::move(curve)};
}

FitResult fit(const Spectrum& spectrum, const Region& region, const ManyKnotBasis& basis, const FitOptions& options) {
    validate_region(region, spectrum);
    FitResult result;
    result.n_points = region.n_points();
    result.criterion_threshold = static_cast<double>(result.n_points);

    KnotGrid grid = initial_grid(region);
    while (true) {
        result.levels.push_back(fit_level(spectrum, region, grid, basis, options.kernels));
        if (options.stop_at_criterion && result.levels.back().chi_square <= result.criterion_threshold) break;
        if (!(grid.spacing() > 1.0)) break;
        grid = refine_grid(grid);
    }

    std::vector<double> chi2;
    chi2.reserve(result.levels.size());
    for (const auto& rec : result.levels) chi2.push_back(rec.chi_square);
    result.selected_level = result.levels[select_level(chi2, result.criterion_threshold)].level;
    return result;
}

double rms_difference(std::span<const double> a, std::span<const double> b, const kernels::KernelSet* kernels) {
    if (a.size() != b.size()) throw InvalidInput("rms_difference: length mismatch");
    if (a.empty()) return 0.0;
    return std::sqrt(kernels::resolve(kernels).squared_distance(a, b) / static_cast<double>(a.size()));
}

}  // namespace mks
