#pragma once

#include <concepts>
#include <cstdint>
#include <functional>
#include <span>
#include <tuple>
#include <string>
#include <vector>

#include "phnn/adam.hpp"
#include "phnn/dataset.hpp"
#include "phnn/error.hpp"
#include "phnn/model.hpp"
#include "phnn/ode.hpp"
#include "phnn/rng.hpp"

namespace phnn {

/// Anything with a differentiable port-Hamiltonian right-hand side and a flat trainable parameter vector.
template <class M>
concept DynamicsModel = requires(const M& model, M& mut, const Vec& v) {
    { model.state_dim() } -> std::convertible_to<int>;
    { model.control_dim() } -> std::convertible_to<int>;
    { model.rhs(v, v) } -> std::convertible_to<Vec>;
    { model.rhs_vjp(v, v, v) } -> std::same_as<FieldVjp>;
    { model.parameters() } -> std::convertible_to<ParameterVector>;
    mut.set_parameters(v);
};

struct TrainConfig {
    std::size_t steps = 1000;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;

    void validate() const {
        if (batch_size < 1) throw ValidationError("TrainConfig: batch_size must be >= 1");
        if (!(learning_rate > 0.0)) throw ValidationError("TrainConfig: learning_rate must be positive");
    }
};

/// State at T after integrating the model from (x, t) with u held constant.
template <DynamicsModel M>
Vec predict(const M& model, const Vec& x, const Vec& u, double t, double T, const SolverConfig& cfg) {
    detail::require_size(x.size(), model.state_dim(), "predict state");
    detail::require_size(u.size(), model.control_dim(), "predict control");
    return ode_solve_rk4([&](const Vec& s) { return model.rhs(s, u); }, x, t, T, cfg);
}

/// Mean over transitions of ‖predict(x, u, t0, t1) − x_next‖².
template <DynamicsModel M>
double transition_loss(const M& model, std::span<const Transition> batch, const SolverConfig& cfg) {
    if (batch.empty()) throw ValidationError("loss: no transitions");
    double sum = 0.0;
    for (const auto& tr : batch) sum += (predict(model, tr.state, tr.control, tr.t0, tr.t1, cfg) - tr.next_state).squaredNorm();
    return sum / static_cast<double>(batch.size());
}

namespace detail {

inline void require_trainable(const Dataset& d) {
    if (d.trajectories.empty()) throw ValidationError("dataset has no trajectories");
    validate_dataset(d);
    for (std::size_t k = 0; k < d.trajectories.size(); ++k)
        if (d.trajectories[k].size() < 2)
            throw ValidationError("trajectory " + std::to_string(k) + ": needs at least 2 samples");
}

}  // namespace detail

/// One-step prediction loss over every consecutive pair in the dataset.
template <DynamicsModel M>
double loss(const M& model, const Dataset& dataset, const SolverConfig& cfg) {
    detail::require_trainable(dataset);
    const auto all = transitions(dataset);
    return transition_loss(model, std::span<const Transition>(all), cfg);
}

struct LossAndGradient {
    double loss = 0.0;
    Vec gradient;
};

/// Batch loss and its exact parameter gradient, backpropagated through every RK4 stage.
template <DynamicsModel M>
LossAndGradient loss_and_gradient(const M& model, std::span<const Transition> batch, const SolverConfig& cfg) {
    if (batch.empty()) throw ValidationError("loss_gradient: no transitions");
    cfg.validate();
    const double dt = cfg.dt;
    const double scale = 1.0 / static_cast<double>(batch.size());
    LossAndGradient out{0.0, Vec::Zero(static_cast<Eigen::Index>(model.parameters().size()))};

    struct StepRecord {
        Vec stage[4];
    };
    std::vector<StepRecord> records;

    for (const auto& tr : batch) {
        const std::size_t steps = integral_step_count(tr.t0, tr.t1, dt);
        const Vec& u = tr.control;
        records.assign(steps, StepRecord{});
        Vec x = tr.state;
        check_state(x, "loss_gradient");
        for (std::size_t s = 0; s < steps; ++s) {
            auto& rec = records[s];
            rec.stage[0] = x;
            const Vec k1 = model.rhs(rec.stage[0], u);
            rec.stage[1] = x + 0.5 * dt * k1;
            const Vec k2 = model.rhs(rec.stage[1], u);
            rec.stage[2] = x + 0.5 * dt * k2;
            const Vec k3 = model.rhs(rec.stage[2], u);
            rec.stage[3] = x + dt * k3;
            const Vec k4 = model.rhs(rec.stage[3], u);
            x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            check_state(x, "loss_gradient");
        }
        const Vec residual = x - tr.next_state;
        out.loss += scale * residual.squaredNorm();

        Vec x_adj = 2.0 * scale * residual;
        for (std::size_t s = steps; s-- > 0;) {
            const auto& rec = records[s];
            Vec k_adj[4] = {dt / 6.0 * x_adj, dt / 3.0 * x_adj, dt / 3.0 * x_adj, dt / 6.0 * x_adj};
            const FieldVjp v4 = model.rhs_vjp(rec.stage[3], u, k_adj[3]);
            x_adj += v4.state;
            k_adj[2] += dt * v4.state;
            out.gradient += v4.params;
            const FieldVjp v3 = model.rhs_vjp(rec.stage[2], u, k_adj[2]);
            x_adj += v3.state;
            k_adj[1] += 0.5 * dt * v3.state;
            out.gradient += v3.params;
            const FieldVjp v2 = model.rhs_vjp(rec.stage[1], u, k_adj[1]);
            x_adj += v2.state;
            k_adj[0] += 0.5 * dt * v2.state;
            out.gradient += v2.params;
            const FieldVjp v1 = model.rhs_vjp(rec.stage[0], u, k_adj[0]);
            x_adj += v1.state;
            out.gradient += v1.params;
        }
    }
    return out;
}

template <DynamicsModel M>
Vec loss_gradient(const M& model, std::span<const Transition> batch, const SolverConfig& cfg) {
    return loss_and_gradient(model, batch, cfg).gradient;
}

template <DynamicsModel M>
struct TrainResult {
    M model;
    std::vector<double> history;  ///< minibatch loss before each Adam step
};

/// Adam on minibatches drawn uniformly with replacement from all transitions.
///
/// `on_step(step, model)` is called after every update when provided.
template <DynamicsModel M>
TrainResult<M> train(M model, const Dataset& dataset, const TrainConfig& train_cfg, const SolverConfig& solver_cfg,
                     const std::function<void(std::size_t, const M&)>& on_step = {}) {
    train_cfg.validate();
    solver_cfg.validate();
    detail::require_trainable(dataset);
    const auto all = transitions(dataset);
    if (train_cfg.batch_size > all.size())
        throw ValidationError("train: batch_size " + std::to_string(train_cfg.batch_size) + " exceeds the " +
                              std::to_string(all.size()) + " available transitions");

    Rng rng(train_cfg.seed);
    AdamState adam = AdamState::init(model.parameters().size(), train_cfg.learning_rate);
    ParameterVector params = model.parameters();
    std::vector<Transition> batch(train_cfg.batch_size);
    TrainResult<M> result{std::move(model), {}};
    result.history.reserve(train_cfg.steps);

    for (std::size_t step = 0; step < train_cfg.steps; ++step) {
        for (auto& b : batch) b = all[rng.uniform_index(all.size())];
        LossAndGradient lg;
        try {
            lg = loss_and_gradient(result.model, std::span<const Transition>(batch), solver_cfg);
        } catch (const DivergenceError& e) {
            throw DivergenceError("train: step " + std::to_string(step) + ": " + e.what());
        }
        if (!std::isfinite(lg.loss) || !lg.gradient.allFinite())
            throw DivergenceError("train: non-finite loss or gradient at step " + std::to_string(step));
        result.history.push_back(lg.loss);
        std::tie(params, adam) = adam_step(adam, params, lg.gradient);
        result.model.set_parameters(params.values());
        if (on_step) on_step(step, result.model);
    }
    return result;
}

}  // namespace phnn
