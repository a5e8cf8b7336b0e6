#pragma once

#include <cmath>
#include <variant>
#include <vector>

#include "phnn/error.hpp"
#include "phnn/linalg.hpp"

namespace phnn {

struct ZeroForcing {
    bool operator==(const ZeroForcing&) const = default;
};

/// amplitude · sin(angular_frequency · t + phase)
struct SinusoidForcing {
    double amplitude = 0.0;          // N
    double angular_frequency = 0.0;  // rad/s
    double phase = 0.0;              // rad

    bool operator==(const SinusoidForcing&) const = default;
};

using ForcingChannel = std::variant<ZeroForcing, SinusoidForcing>;

/// One entry per control channel.
using ForcingSpec = std::vector<ForcingChannel>;

inline void validate_forcing(const ForcingSpec& spec) {
    for (const auto& ch : spec) {
        if (const auto* s = std::get_if<SinusoidForcing>(&ch)) {
            if (!std::isfinite(s->amplitude) || !std::isfinite(s->phase))
                throw ValidationError("forcing: amplitude and phase must be finite");
            if (!(s->angular_frequency >= 0.0) || !std::isfinite(s->angular_frequency))
                throw ValidationError("forcing: angular frequency must be finite and >= 0");
        }
    }
}

inline Vec forcing(const ForcingSpec& spec, double t) {
    Vec u(static_cast<Eigen::Index>(spec.size()));
    for (std::size_t i = 0; i < spec.size(); ++i) {
        if (const auto* s = std::get_if<SinusoidForcing>(&spec[i]))
            u(static_cast<Eigen::Index>(i)) = s->amplitude * std::sin(s->angular_frequency * t + s->phase);
        else
            u(static_cast<Eigen::Index>(i)) = 0.0;
    }
    return u;
}

}  // namespace phnn
