#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "phnn/error.hpp"
#include "phnn/linalg.hpp"
#include "phnn/parameters.hpp"
#include "phnn/rng.hpp"

namespace phnn {

enum class Activation { tanh };

inline std::string to_string(Activation a) {
    switch (a) {
        case Activation::tanh: return "tanh";
    }
    return "unknown";
}

inline Activation activation_from_string(const std::string& s) {
    if (s == "tanh") return Activation::tanh;
    throw ValidationError("unknown activation '" + s + "'");
}

/// Fully connected network shape. Hidden layers use `activation`, the output layer is affine.
struct MlpSpec {
    int input_dim = 1;
    std::vector<int> hidden;
    int output_dim = 1;
    Activation activation = Activation::tanh;

    bool operator==(const MlpSpec&) const = default;

    void validate() const {
        if (input_dim < 1 || output_dim < 1) throw ValidationError("MlpSpec: widths must be >= 1");
        for (int w : hidden)
            if (w < 1) throw ValidationError("MlpSpec: hidden widths must be >= 1");
    }

    /// Widths from input to output, e.g. {2, 32, 32, 1}.
    std::vector<int> widths() const {
        std::vector<int> w{input_dim};
        w.insert(w.end(), hidden.begin(), hidden.end());
        w.push_back(output_dim);
        return w;
    }

    std::size_t num_layers() const { return hidden.size() + 1; }

    std::size_t parameter_count() const {
        const auto w = widths();
        std::size_t count = 0;
        for (std::size_t l = 0; l + 1 < w.size(); ++l)
            count += static_cast<std::size_t>(w[l] + 1) * static_cast<std::size_t>(w[l + 1]);
        return count;
    }
};

/// Glorot-uniform weights, zero biases. Deterministic in `seed`.
inline ParameterVector init_params(const MlpSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    const auto w = spec.widths();
    Vec values = Vec::Zero(static_cast<Eigen::Index>(spec.parameter_count()));
    std::vector<Slice> layout;
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < w.size(); ++l) {
        const auto fan_in = static_cast<std::size_t>(w[l]);
        const auto fan_out = static_cast<std::size_t>(w[l + 1]);
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (std::size_t i = 0; i < fan_in * fan_out; ++i)
            values(static_cast<Eigen::Index>(offset + i)) = rng.uniform(-limit, limit);
        layout.push_back({"layer" + std::to_string(l) + ".weight", offset, fan_in * fan_out});
        offset += fan_in * fan_out;
        layout.push_back({"layer" + std::to_string(l) + ".bias", offset, fan_out});
        offset += fan_out;
    }
    return ParameterVector(std::move(values), std::move(layout));
}

namespace detail {

using ConstParams = Eigen::Ref<const Vec>;

struct LayerMaps {
    Eigen::Map<const RowMajorMat> weight;
    Eigen::Map<const Vec> bias;
};

inline std::vector<LayerMaps> layer_maps(const MlpSpec& spec, const ConstParams& params) {
    spec.validate();
    require_size(params.size(), static_cast<Eigen::Index>(spec.parameter_count()), "mlp parameters");
    const auto w = spec.widths();
    std::vector<LayerMaps> maps;
    maps.reserve(w.size() - 1);
    const double* p = params.data();
    for (std::size_t l = 0; l + 1 < w.size(); ++l) {
        const Eigen::Index in = w[l], out = w[l + 1];
        maps.push_back({Eigen::Map<const RowMajorMat>(p, out, in), Eigen::Map<const Vec>(p + out * in, out)});
        p += out * in + out;
    }
    return maps;
}

/// Writes gradient blocks into a flat vector with the same layout as the parameters.
struct GradientMaps {
    std::vector<Eigen::Map<RowMajorMat>> weight;
    std::vector<Eigen::Map<Vec>> bias;
};

inline GradientMaps gradient_maps(const MlpSpec& spec, Vec& grad) {
    const auto w = spec.widths();
    GradientMaps g;
    double* p = grad.data();
    for (std::size_t l = 0; l + 1 < w.size(); ++l) {
        const Eigen::Index in = w[l], out = w[l + 1];
        g.weight.emplace_back(p, out, in);
        g.bias.emplace_back(p + out * in, out);
        p += out * in + out;
    }
    return g;
}

/// Forward pass keeping every layer input: acts[0] = x, acts[l] = tanh(...) for hidden layers.
struct ForwardCache {
    std::vector<Vec> acts;
    Vec output;
};

inline ForwardCache forward_cache(const std::vector<LayerMaps>& layers, const Eigen::Ref<const Vec>& x) {
    ForwardCache cache;
    cache.acts.reserve(layers.size());
    cache.acts.emplace_back(x);
    for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
        Vec z = layers[l].weight * cache.acts.back() + layers[l].bias;
        cache.acts.emplace_back(z.array().tanh().matrix());
    }
    cache.output = layers.back().weight * cache.acts.back() + layers.back().bias;
    return cache;
}

}  // namespace detail

inline Vec mlp_forward(const MlpSpec& spec, const Eigen::Ref<const Vec>& params, const Eigen::Ref<const Vec>& input) {
    const auto layers = detail::layer_maps(spec, params);
    detail::require_size(input.size(), spec.input_dim, "mlp_forward input");
    Vec a = input;
    for (std::size_t l = 0; l + 1 < layers.size(); ++l)
        a = (layers[l].weight * a + layers[l].bias).array().tanh().matrix();
    return layers.back().weight * a + layers.back().bias;
}

struct MlpVjp {
    Vec param_gradient;
    Vec input_gradient;
};

/// cotangentᵀ · d(output)/d(params) and cotangentᵀ · d(output)/d(input).
inline MlpVjp mlp_vjp(const MlpSpec& spec, const Eigen::Ref<const Vec>& params, const Eigen::Ref<const Vec>& input,
                      const Eigen::Ref<const Vec>& cotangent) {
    const auto layers = detail::layer_maps(spec, params);
    detail::require_size(input.size(), spec.input_dim, "mlp_vjp input");
    detail::require_size(cotangent.size(), spec.output_dim, "mlp_vjp cotangent");
    const auto cache = detail::forward_cache(layers, input);

    MlpVjp out{Vec::Zero(params.size()), Vec()};
    auto grads = detail::gradient_maps(spec, out.param_gradient);
    Vec delta = cotangent;
    for (std::size_t l = layers.size(); l-- > 0;) {
        grads.weight[l].noalias() = delta * cache.acts[l].transpose();
        grads.bias[l] = delta;
        Vec upstream = layers[l].weight.transpose() * delta;
        if (l == 0) {
            out.input_gradient = std::move(upstream);
        } else {
            delta = upstream.cwiseProduct((1.0 - cache.acts[l].array().square()).matrix());
        }
    }
    return out;
}

/// Jacobian d(output)/d(input), output_dim x input_dim. Row i is the reverse sweep with cotangent e_i.
inline Mat mlp_input_gradient(const MlpSpec& spec, const Eigen::Ref<const Vec>& params,
                              const Eigen::Ref<const Vec>& input) {
    Mat jac(spec.output_dim, spec.input_dim);
    for (int i = 0; i < spec.output_dim; ++i)
        jac.row(i) = mlp_vjp(spec, params, input, Vec::Unit(spec.output_dim, i)).input_gradient.transpose();
    return jac;
}

/// Gradient of a scalar-output network with respect to its input.
inline Vec mlp_scalar_gradient(const MlpSpec& spec, const Eigen::Ref<const Vec>& params,
                               const Eigen::Ref<const Vec>& input) {
    if (spec.output_dim != 1) throw DimensionError("mlp_scalar_gradient: network output is not scalar");
    return mlp_vjp(spec, params, input, Vec::Ones(1)).input_gradient;
}

struct GradientVjp {
    Vec gradient;        ///< ∇ₓf(x)
    Vec input_gradient;  ///< ∇ₓ(rᵀ∇ₓf) = ∇²f · r
    Vec param_gradient;  ///< ∇_θ(rᵀ∇ₓf)
};

/// Reverse-mode derivative of s(x, θ) = rᵀ∇ₓf(x; θ) for a scalar-output network f.
///
/// s is the directional derivative of f along r, so it is evaluated with one
/// tangent-propagating forward pass and then differentiated by a reverse sweep
/// over both the primal and the tangent channels.
inline GradientVjp mlp_gradient_vjp(const MlpSpec& spec, const Eigen::Ref<const Vec>& params,
                                    const Eigen::Ref<const Vec>& input, const Eigen::Ref<const Vec>& direction) {
    if (spec.output_dim != 1) throw DimensionError("mlp_gradient_vjp: network output is not scalar");
    const auto layers = detail::layer_maps(spec, params);
    detail::require_size(input.size(), spec.input_dim, "mlp_gradient_vjp input");
    detail::require_size(direction.size(), spec.input_dim, "mlp_gradient_vjp direction");
    const auto cache = detail::forward_cache(layers, input);
    const std::size_t num = layers.size();

    // Tangent pass: tan_acts[l] is d(acts[l])/dε along the direction; tan_pre[l] the pre-activation tangent.
    std::vector<Vec> tan_acts(num), tan_pre(num);
    tan_acts[0] = direction;
    for (std::size_t l = 1; l < num; ++l) {
        tan_pre[l] = layers[l - 1].weight * tan_acts[l - 1];
        tan_acts[l] = (1.0 - cache.acts[l].array().square()).matrix().cwiseProduct(tan_pre[l]);
    }

    GradientVjp out{Vec(), Vec(), Vec::Zero(params.size())};
    auto grads = detail::gradient_maps(spec, out.param_gradient);

    // s = W_last · tan_acts[last]
    grads.weight[num - 1].noalias() = tan_acts[num - 1].transpose();
    Vec tan_adj = layers[num - 1].weight.transpose();  // adjoint of tan_acts[num-1]
    Vec act_adj = Vec::Zero(tan_adj.size());           // adjoint of acts[num-1]

    for (std::size_t l = num - 1; l >= 1; --l) {
        const auto& a = cache.acts[l];
        const Vec slope = 1.0 - a.array().square();
        const Vec tan_pre_adj = slope.cwiseProduct(tan_adj);
        act_adj -= 2.0 * (tan_adj.array() * tan_pre[l].array() * a.array()).matrix();
        const Vec pre_adj = act_adj.cwiseProduct(slope);
        grads.weight[l - 1].noalias() += tan_pre_adj * tan_acts[l - 1].transpose();
        grads.weight[l - 1].noalias() += pre_adj * cache.acts[l - 1].transpose();
        grads.bias[l - 1] += pre_adj;
        tan_adj = layers[l - 1].weight.transpose() * tan_pre_adj;
        act_adj = layers[l - 1].weight.transpose() * pre_adj;
    }
    out.gradient = std::move(tan_adj);
    out.input_gradient = std::move(act_adj);
    return out;
}

}  // namespace phnn
