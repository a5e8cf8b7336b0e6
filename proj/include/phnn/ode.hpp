#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "phnn/error.hpp"
#include "phnn/linalg.hpp"

namespace phnn {

enum class Scheme { rk4_fixed };

struct SolverConfig {
    double dt = 0.01;
    Scheme scheme = Scheme::rk4_fixed;

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("SolverConfig: dt must be positive and finite");
    }
};

/// Largest magnitude a state entry may reach before integration is aborted.
inline constexpr double kDivergenceLimit = 1e6;

inline void check_state(const Eigen::Ref<const Vec>& x, const char* where) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x(i)) || std::abs(x(i)) > kDivergenceLimit) {
            throw DivergenceError(std::string(where) + ": state entry " + std::to_string(i) + " = " +
                                  std::to_string(x(i)) + " left the admissible range");
        }
    }
}

/// Number of fixed steps covering [t0, T]; (T − t0)/dt must be integral to within 1e-9.
inline std::size_t integral_step_count(double t0, double T, double dt) {
    if (!(dt > 0.0)) throw ValidationError("step count: dt must be positive");
    if (T < t0) throw ValidationError("step count: end time precedes start time");
    const double ratio = (T - t0) / dt;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9) {
        throw ValidationError("step count: (T - t0)/dt = " + std::to_string(ratio) + " is not an integer");
    }
    return static_cast<std::size_t>(rounded);
}

/// One classical RK4 step of an autonomous field x ↦ f(x).
template <class Field>
Vec rk4_step(Field&& f, const Vec& x, double dt) {
    const Vec k1 = f(x);
    const Vec k2 = f(Vec(x + 0.5 * dt * k1));
    const Vec k3 = f(Vec(x + 0.5 * dt * k2));
    const Vec k4 = f(Vec(x + dt * k3));
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Integrate from t0 to T with constant step cfg.dt, returning every state (x0 first).
template <class Field>
std::vector<Vec> ode_solve_rk4_path(Field&& f, const Vec& x0, double t0, double T, const SolverConfig& cfg) {
    cfg.validate();
    const std::size_t steps = integral_step_count(t0, T, cfg.dt);
    check_state(x0, "ode_solve_rk4");
    std::vector<Vec> path;
    path.reserve(steps + 1);
    path.push_back(x0);
    for (std::size_t s = 0; s < steps; ++s) {
        Vec next = rk4_step(f, path.back(), cfg.dt);
        check_state(next, "ode_solve_rk4");
        path.push_back(std::move(next));
    }
    return path;
}

template <class Field>
Vec ode_solve_rk4(Field&& f, const Vec& x0, double t0, double T, const SolverConfig& cfg) {
    cfg.validate();
    const std::size_t steps = integral_step_count(t0, T, cfg.dt);
    check_state(x0, "ode_solve_rk4");
    Vec x = x0;
    for (std::size_t s = 0; s < steps; ++s) {
        x = rk4_step(f, x, cfg.dt);
        check_state(x, "ode_solve_rk4");
    }
    return x;
}

}  // namespace phnn
