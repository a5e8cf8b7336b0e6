#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phnn/error.hpp"
#include "phnn/forcing.hpp"
#include "phnn/linalg.hpp"

namespace phnn {

/// Time-stamped states and controls; controls[i] is held from times[i] to times[i+1].
struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<Vec> controls;

    std::size_t size() const noexcept { return times.size(); }
};

struct DatasetMetadata {
    double dt = 0.0;
    std::string system;
    std::uint64_t seed = 0;
    ForcingSpec forcing;
};

struct Dataset {
    std::vector<Trajectory> trajectories;
    DatasetMetadata metadata;

    std::size_t transition_count() const {
        std::size_t n = 0;
        for (const auto& t : trajectories) n += t.size() > 0 ? t.size() - 1 : 0;
        return n;
    }

    int state_dim() const { return trajectories.empty() || trajectories[0].states.empty() ? 0 : static_cast<int>(trajectories[0].states[0].size()); }
    int control_dim() const { return trajectories.empty() || trajectories[0].controls.empty() ? 0 : static_cast<int>(trajectories[0].controls[0].size()); }
};

/// Checks equal lengths, strictly increasing times, finite values and uniform dimensions.
/// Messages name the trajectory index and field. An empty trajectory list is valid here.
inline void validate_dataset(const Dataset& d) {
    int n = -1, m = -1;
    for (std::size_t k = 0; k < d.trajectories.size(); ++k) {
        const auto& tr = d.trajectories[k];
        const std::string where = "trajectory " + std::to_string(k);
        if (tr.states.size() != tr.times.size() || tr.controls.size() != tr.times.size())
            throw ValidationError(where + ": times/states/controls lengths differ");
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            if (!std::isfinite(tr.times[i])) throw ValidationError(where + ": field t index " + std::to_string(i) + " is not finite");
            if (i > 0 && !(tr.times[i] > tr.times[i - 1]))
                throw ValidationError(where + ": field t is not strictly increasing at index " + std::to_string(i));
            if (n < 0) n = static_cast<int>(tr.states[i].size());
            if (m < 0) m = static_cast<int>(tr.controls[i].size());
            if (tr.states[i].size() != n)
                throw ValidationError(where + ": field x index " + std::to_string(i) + " has inconsistent dimension");
            if (tr.controls[i].size() != m)
                throw ValidationError(where + ": field u index " + std::to_string(i) + " has inconsistent dimension");
            if (!tr.states[i].allFinite())
                throw ValidationError(where + ": field x index " + std::to_string(i) + " is not finite");
            if (!tr.controls[i].allFinite())
                throw ValidationError(where + ": field u index " + std::to_string(i) + " is not finite");
        }
    }
}

/// One-step transition (x, u, t0) → x_next at t1.
struct Transition {
    Vec state;
    Vec control;
    double t0 = 0.0;
    double t1 = 0.0;
    Vec next_state;
};

/// All consecutive pairs, in trajectory order.
inline std::vector<Transition> transitions(const Dataset& d) {
    std::vector<Transition> out;
    out.reserve(d.transition_count());
    for (const auto& tr : d.trajectories) {
        for (std::size_t i = 0; i + 1 < tr.size(); ++i)
            out.push_back({tr.states[i], tr.controls[i], tr.times[i], tr.times[i + 1], tr.states[i + 1]});
    }
    return out;
}

}  // namespace phnn
