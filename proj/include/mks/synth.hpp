#pragma once

// Synthetic spectra: a flat baseline plus Gaussian peaks, with Gaussian noise
// whose standard deviation is the square root of the noiseless count.
//
// Random numbers come from std::mt19937_64 seeded with SynthConfig::seed.
// Each raw 64-bit output x is mapped to a uniform u = ((x >> 11) + 0.5) / 2^53
// in (0, 1), and standard normals are produced by the Box-Muller transform
// from consecutive uniform pairs (u1, u2): first sqrt(-2 ln u1) cos(2 pi u2),
// then sqrt(-2 ln u1) sin(2 pi u2). Channels consume deviates in order. This
// recipe is fixed; golden test data depend on it.

#include <cstdint>
#include <random>
#include <vector>

#include "mks/spectrum.hpp"

namespace mks {

struct PeakSpec {
    double center;     // channel
    double amplitude;  // counts, > 0
    double width;      // Gaussian sigma in channels, > 0

    friend bool operator==(const PeakSpec&, const PeakSpec&) = default;
};

struct SynthConfig {
    std::size_t n_channels = 1024;
    double baseline = 20.0;
    std::vector<PeakSpec> peaks{{200.0, 400.0, 8.0}, {512.0, 900.0, 12.0}, {800.0, 250.0, 6.0}};
    std::uint64_t seed = 42;

    /// Throws InvalidInput on fewer than 5 channels, a negative baseline or a
    /// peak with nonpositive amplitude or width.
    void validate() const;
};

/// Noiseless counts; independent of the seed.
[[nodiscard]] std::vector<double> truth_curve(const SynthConfig& config);

[[nodiscard]] Spectrum synthesize(const SynthConfig& config);

/// Standard normal deviates following the documented recipe above.
class NormalSource {
public:
    explicit NormalSource(std::uint64_t seed) : engine_(seed) {}

    double operator()();

private:
    double uniform();

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace mks
