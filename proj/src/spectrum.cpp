#include "mks/spectrum.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "mks/errors.hpp"

namespace mks {

Spectrum::Spectrum(std::vector<double> counts) : counts_(std::move(counts)) {
    if (counts_.size() < min_channels) {
        throw InvalidInput("a spectrum needs at least 5 channels, got " + std::to_string(counts_.size()));
    }
    for (std::size_t c = 0; c < counts_.size(); ++c) {
        if (!std::isfinite(counts_[c]) || counts_[c] < 0.0) {
            throw InvalidInput("channel " + std::to_string(c) + " has a negative or non-finite count");
        }
    }
}

void validate_region(const Region& region) {
    if (region.end <= region.start || region.end - region.start < 4) {
        throw InvalidRegion("region [" + std::to_string(region.start) + ", " + std::to_string(region.end) +
                            "] cannot hold 5 knots");
    }
}

void validate_region(const Region& region, const Spectrum& spectrum) {
    validate_region(region);
    if (region.end >= spectrum.size()) {
        throw InvalidRegion("region end " + std::to_string(region.end) + " is past the last channel " +
                            std::to_string(spectrum.size() - 1));
    }
}

}  // namespace mks
