#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mks {

/// Counts on contiguous channels 0..size()-1. At least 5 channels, all
/// counts finite and nonnegative.
class Spectrum {
public:
    static constexpr std::size_t min_channels = 5;

    /// Throws InvalidInput when the invariants do not hold.
    explicit Spectrum(std::vector<double> counts);

    [[nodiscard]] std::size_t size() const noexcept { return counts_.size(); }
    [[nodiscard]] std::span<const double> counts() const noexcept { return counts_; }
    [[nodiscard]] double operator[](std::size_t channel) const noexcept { return counts_[channel]; }

    friend bool operator==(const Spectrum&, const Spectrum&) = default;

private:
    std::vector<double> counts_;
};

/// Inclusive channel range [start, end] holding at least 5 channels.
struct Region {
    std::size_t start = 0;
    std::size_t end = 0;

    [[nodiscard]] constexpr std::size_t n_points() const noexcept { return end - start + 1; }
    friend constexpr bool operator==(const Region&, const Region&) = default;
};

/// Throws InvalidRegion unless start < end, end - start >= 4 and the region
/// fits inside the spectrum.
void validate_region(const Region& region, const Spectrum& spectrum);
void validate_region(const Region& region);

[[nodiscard]] inline Region whole(const Spectrum& spectrum) noexcept {
    return {0, spectrum.size() - 1};
}

}  // namespace mks
