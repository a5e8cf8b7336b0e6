#pragma once

#include <cstddef>

#include "phnn/dataset.hpp"
#include "phnn/forcing.hpp"
#include "phnn/ode.hpp"

namespace phnn {

/// Simulate ẋ = f(x, u) with RK4, holding u = forcing(tᵢ) constant over each step.
/// Returns n_steps + 1 samples at tᵢ = t0 + i·dt.
template <class Field>
Trajectory simulate_trajectory(Field&& f, const Vec& x0, const ForcingSpec& forcing_spec, double t0,
                               std::size_t n_steps, double dt) {
    SolverConfig{dt}.validate();
    check_state(x0, "simulate_trajectory");
    Trajectory tr;
    tr.times.reserve(n_steps + 1);
    tr.states.reserve(n_steps + 1);
    tr.controls.reserve(n_steps + 1);
    Vec x = x0;
    for (std::size_t i = 0;; ++i) {
        const double t = t0 + static_cast<double>(i) * dt;
        const Vec u = forcing(forcing_spec, t);
        tr.times.push_back(t);
        tr.states.push_back(x);
        tr.controls.push_back(u);
        if (i == n_steps) break;
        x = rk4_step([&](const Vec& s) { return f(s, u); }, x, dt);
        check_state(x, "simulate_trajectory");
    }
    return tr;
}

}  // namespace phnn
