#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "phnn/coupling.hpp"
#include "phnn/dataset.hpp"
#include "phnn/error.hpp"
#include "phnn/forcing.hpp"
#include "phnn/linalg.hpp"
#include "phnn/model.hpp"
#include "phnn/rng.hpp"
#include "phnn/rollout.hpp"

namespace phnn {

/// Spring-mass-damper with cubic damping F = b q̇³. State (Δq, p).
struct SMDParams {
    double mass = 1.0;             // kg
    double spring_constant = 1.0;  // N/m
    double damping = 0.0;          // N s³/m³

    void validate() const {
        if (!(mass > 0.0)) throw ValidationError("SMDParams: mass must be positive");
        if (!(spring_constant > 0.0)) throw ValidationError("SMDParams: spring constant must be positive");
        if (!(damping >= 0.0)) throw ValidationError("SMDParams: damping must be non-negative");
    }
};

inline double smd_hamiltonian(const SMDParams& p, const Vec& x) {
    detail::require_size(x.size(), 2, "smd_hamiltonian state");
    return x(1) * x(1) / (2.0 * p.mass) + p.spring_constant * x(0) * x(0) / 2.0;
}

inline Vec smd_hamiltonian_gradient(const SMDParams& p, const Vec& x) {
    detail::require_size(x.size(), 2, "smd_hamiltonian_gradient state");
    return Vec{{p.spring_constant * x(0), x(1) / p.mass}};
}

/// R(2,2) entry b p²/m².
inline double smd_damping_entry(const SMDParams& p, const Vec& x) { return p.damping * x(1) * x(1) / (p.mass * p.mass); }

/// (p/m, −kΔq − b p³/m³ + u)
inline Vec smd_rhs(const SMDParams& p, const Vec& x, const Vec& u) {
    detail::require_size(x.size(), 2, "smd_rhs state");
    detail::require_size(u.size(), 1, "smd_rhs control");
    const double dq = x(1) / p.mass;
    const double force = p.spring_constant * x(0);
    return Vec{{dq, -force - smd_damping_entry(p, x) * dq + u(0)}};
}

/// The spring-mass-damper as a PHNNModel in oracle mode (closed-form H, R, G).
inline PHNNModel smd_oracle_model(const SMDParams& params) {
    params.validate();
    OracleHamiltonian H{
        [params](const Vec& x) { return smd_hamiltonian(params, x); },
        [params](const Vec& x) { return smd_hamiltonian_gradient(params, x); },
        [params](const Vec&, const Vec& r) { return Vec{{params.spring_constant * r(0), r(1) / params.mass}}; }};
    OracleDissipation R{
        [params](const Vec& x) {
            Mat m = Mat::Zero(2, 2);
            m(1, 1) = smd_damping_entry(params, x);
            return m;
        },
        [params](const Vec& x, const Mat& W) {
            return Vec{{0.0, W(1, 1) * 2.0 * params.damping * x(1) / (params.mass * params.mass)}};
        }};
    OracleInputMap G{[](const Vec&) { return Mat{{0.0}, {1.0}}; }, {}};
    return PHNNModel(2, 1, canonical_interconnection(), std::move(H), std::move(R), std::move(G),
                     ParameterVector::concat({{"hamiltonian", Vec()}, {"dissipation", Vec()}, {"input_map", Vec()}}));
}

/// Coupled spring-mass-dampers: [Diag(Jᵢ) + C − R_c(x)]∇H_c + G_c u_c, written out per subsystem.
inline Vec composite_smd_rhs(const std::vector<SMDParams>& params, const CouplingModel& coupling, const Vec& x,
                             const Vec& u) {
    const std::size_t k = params.size();
    const auto& layout = coupling.layout();
    if (layout.size() != k) throw DimensionError("composite_smd_rhs: coupling layout does not match parameter list");
    for (std::size_t i = 0; i < k; ++i)
        if (layout.state_dim(i) != 2 || layout.control_dim(i) != 1)
            throw DimensionError("composite_smd_rhs: every subsystem must have n = 2, m = 1");
    detail::require_size(x.size(), static_cast<Eigen::Index>(2 * k), "composite_smd_rhs state");
    detail::require_size(u.size(), static_cast<Eigen::Index>(k), "composite_smd_rhs control");

    Vec grad(2 * k);
    for (std::size_t i = 0; i < k; ++i) grad.segment(2 * i, 2) = smd_hamiltonian_gradient(params[i], x.segment(2 * i, 2));
    const Vec coupled = coupling.matrix(x) * grad;

    Vec out(2 * k);
    for (std::size_t i = 0; i < k; ++i) {
        const Vec xi = x.segment(2 * i, 2);
        out(2 * i) = smd_rhs(params[i], xi, u.segment(i, 1))(0) + coupled(2 * i);
        out(2 * i + 1) = smd_rhs(params[i], xi, u.segment(i, 1))(1) + coupled(2 * i + 1);
    }
    return out;
}

struct DatasetSpec {
    std::size_t n_trajectories = 100;
    std::size_t n_steps = 500;
    double dt = 0.01;
    Vec initial_low;
    Vec initial_high;
    ForcingSpec forcing;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_trajectories < 1) throw ValidationError("DatasetSpec: n_trajectories must be >= 1");
        if (n_steps < 1) throw ValidationError("DatasetSpec: n_steps must be >= 1");
        if (!(dt > 0.0)) throw ValidationError("DatasetSpec: dt must be positive");
        if (initial_low.size() != initial_high.size() || initial_low.size() == 0)
            throw ValidationError("DatasetSpec: initial box bounds must have equal, nonzero length");
        for (Eigen::Index i = 0; i < initial_low.size(); ++i)
            if (!(initial_low(i) <= initial_high(i))) throw ValidationError("DatasetSpec: initial box has lower > upper");
        validate_forcing(forcing);
    }
};

/// Simulates `n_trajectories` rollouts from uniformly sampled initial states.
/// Trajectory k draws its initial state from derive_seed(seed, k).
template <class Field>
Dataset generate_dataset(Field&& field, const DatasetSpec& spec, std::string system = "") {
    spec.validate();
    Dataset d;
    d.metadata = {spec.dt, std::move(system), spec.seed, spec.forcing};
    d.trajectories.reserve(spec.n_trajectories);
    for (std::size_t k = 0; k < spec.n_trajectories; ++k) {
        Rng rng(derive_seed(spec.seed, k));
        Vec x0(spec.initial_low.size());
        for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) = rng.uniform(spec.initial_low(i), spec.initial_high(i));
        d.trajectories.push_back(simulate_trajectory(field, x0, spec.forcing, 0.0, spec.n_steps, spec.dt));
    }
    return d;
}

/// Subsystem parameters from the two-mass experiment: m = 1, k = 1.2 / 1.5, b = 1.7.
inline SMDParams default_subsystem_1() { return {1.0, 1.2, 1.7}; }
inline SMDParams default_subsystem_2() { return {1.0, 1.5, 1.7}; }

}  // namespace phnn
