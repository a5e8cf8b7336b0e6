#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

#include "phnn/error.hpp"
#include "phnn/linalg.hpp"
#include "phnn/parameters.hpp"

namespace phnn {

/// Moment estimates and hyperparameters of the Adam optimizer.
struct AdamState {
    Vec first_moment;
    Vec second_moment;
    std::int64_t step_count = 0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState init(std::size_t size, double learning_rate = 1e-3) {
        if (!(learning_rate > 0.0)) throw ValidationError("AdamState: learning rate must be positive");
        AdamState s;
        s.first_moment = Vec::Zero(static_cast<Eigen::Index>(size));
        s.second_moment = Vec::Zero(static_cast<Eigen::Index>(size));
        s.learning_rate = learning_rate;
        return s;
    }
};

/// One bias-corrected Adam update. Returns the new parameters and the new state.
inline std::pair<ParameterVector, AdamState> adam_step(const AdamState& state, const ParameterVector& params,
                                                       const Eigen::Ref<const Vec>& grads) {
    const auto n = static_cast<Eigen::Index>(params.size());
    detail::require_size(grads.size(), n, "adam_step gradient");
    detail::require_size(state.first_moment.size(), n, "adam_step first moment");
    detail::require_size(state.second_moment.size(), n, "adam_step second moment");
    if (!grads.allFinite()) throw DivergenceError("adam_step: non-finite gradient entry");

    AdamState next = state;
    next.step_count = state.step_count + 1;
    next.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * grads;
    next.second_moment = state.beta2 * state.second_moment + (1.0 - state.beta2) * grads.cwiseAbs2();

    const double t = static_cast<double>(next.step_count);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);
    const Vec m_hat = next.first_moment / c1;
    const Vec v_hat = next.second_moment / c2;
    const Vec update = state.learning_rate * (m_hat.array() / (v_hat.array().sqrt() + state.epsilon)).matrix();
    return {params.with_values(params.values() - update), std::move(next)};
}

inline std::pair<ParameterVector, AdamState> adam_step(const AdamState& state, const ParameterVector& params,
                                                       const ParameterVector& grads) {
    return adam_step(state, params, grads.values());
}

}  // namespace phnn
