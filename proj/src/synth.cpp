#include "mks/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mks/errors.hpp"

namespace mks {

void SynthConfig::validate() const {
    if (n_channels < Spectrum::min_channels) {
        throw InvalidInput("synthetic spectrum needs at least 5 channels, got " + std::to_string(n_channels));
    }
    if (!(baseline >= 0.0) || !std::isfinite(baseline)) throw InvalidInput("baseline must be finite and >= 0");
    for (const auto& p : peaks) {
        if (!(p.amplitude > 0.0) || !(p.width > 0.0) || !std::isfinite(p.center) || !std::isfinite(p.amplitude) ||
            !std::isfinite(p.width)) {
            throw InvalidInput("peak amplitude and width must be finite and positive");
        }
    }
}

std::vector<double> truth_curve(const SynthConfig& config) {
    config.validate();
    std::vector<double> f(config.n_channels, config.baseline);
    for (std::size_t c = 0; c < f.size(); ++c) {
        for (const auto& p : config.peaks) {
            const double d = static_cast<double>(c) - p.center;
            f[c] += p.amplitude * std::exp(-d * d / (2.0 * p.width * p.width));
        }
    }
    return f;
}

Spectrum synthesize(const SynthConfig& config) {
    auto counts = truth_curve(config);
    NormalSource normal(config.seed);
    for (double& f : counts) {
        const double g = normal();
        f = std::max(0.0, std::round(f + std::sqrt(std::max(f, 0.0)) * g));
    }
    return Spectrum(std::move(counts));
}

double NormalSource::uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double NormalSource::operator()() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

}  // namespace mks
