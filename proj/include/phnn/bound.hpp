#pragma once

#include <cstdint>
#include <vector>

#include "phnn/composition.hpp"
#include "phnn/coupling.hpp"
#include "phnn/error.hpp"
#include "phnn/linalg.hpp"
#include "phnn/model.hpp"
#include "phnn/rng.hpp"

namespace phnn {

/// Per-subsystem boxes for states and controls.
struct SamplingDomain {
    std::vector<Vec> state_lower, state_upper;
    std::vector<Vec> control_lower, control_upper;

    void validate(const SubsystemLayout& layout) const {
        const std::size_t k = layout.size();
        if (state_lower.size() != k || state_upper.size() != k || control_lower.size() != k || control_upper.size() != k)
            throw DimensionError("SamplingDomain: need one box per subsystem");
        for (std::size_t i = 0; i < k; ++i) {
            detail::require_size(state_lower[i].size(), layout.state_dim(i), "SamplingDomain state lower");
            detail::require_size(state_upper[i].size(), layout.state_dim(i), "SamplingDomain state upper");
            detail::require_size(control_lower[i].size(), layout.control_dim(i), "SamplingDomain control lower");
            detail::require_size(control_upper[i].size(), layout.control_dim(i), "SamplingDomain control upper");
            if ((state_lower[i].array() > state_upper[i].array()).any() ||
                (control_lower[i].array() > control_upper[i].array()).any())
                throw ValidationError("SamplingDomain: lower bound exceeds upper bound");
        }
    }

    /// Same box [lo, hi] for every state coordinate and [ulo, uhi] for every control.
    static SamplingDomain uniform(const SubsystemLayout& layout, double lo, double hi, double ulo, double uhi) {
        SamplingDomain d;
        for (std::size_t i = 0; i < layout.size(); ++i) {
            d.state_lower.push_back(Vec::Constant(layout.state_dim(i), lo));
            d.state_upper.push_back(Vec::Constant(layout.state_dim(i), hi));
            d.control_lower.push_back(Vec::Constant(layout.control_dim(i), ulo));
            d.control_upper.push_back(Vec::Constant(layout.control_dim(i), uhi));
        }
        return d;
    }
};

/// Sampled quantities of the composite-error bound
///   ‖P_c − P_c,Θ‖ ≤ Σᵢ εᵢ + Σ_{i≠j} (γᵢⱼ + σᵢⱼ ηⱼ).
struct BoundReport {
    std::vector<double> eps;  ///< max ‖Pᵢ − Pᵢ,Θ‖
    std::vector<double> eta;  ///< max ‖∇Hᵢ − ∇Hᵢ,θ‖
    Mat gamma;                ///< γᵢⱼ = max ‖(Cᵢⱼ − C_φ,ᵢⱼ)∇Hⱼ‖, diagonal 0
    Mat sigma;                ///< σᵢⱼ = max ‖C_φ,ᵢⱼ‖₂, diagonal 0
    double lhs_max = 0.0;     ///< max ‖P_c − P_c,Θ‖
    std::size_t lhs_argmax = 0;
    /// Σᵢ εᵢ + Σ_{i≠j}(γᵢⱼ + σᵢⱼ ηⱼ): holds pointwise by the triangle inequality, hence over shared maxima.
    double rhs = 0.0;
    /// Σᵢ [εᵢ + 2 Σ_{j>i}(γᵢⱼ + σᵢⱼ ηⱼ)]: the pair-symmetric form. Agrees with `rhs` when
    /// γᵢⱼ = γⱼᵢ and ηᵢ = ηⱼ; otherwise it may undercut lhs_max.
    double rhs_pairwise = 0.0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    SamplingDomain domain;

    bool holds() const { return lhs_max <= rhs; }
};

/// Evaluates every bound term at `n_samples` composite points drawn uniformly from `domain`.
/// Sample s uses derive_seed(seed, s), so the report does not depend on evaluation order.
inline BoundReport error_bound_report(const std::vector<PHNNModel>& true_systems, const std::vector<PHNNModel>& submodels,
                                      const CouplingModel& true_coupling, const CouplingModel& learned_coupling,
                                      const SamplingDomain& domain, std::size_t n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw ValidationError("error_bound_report: n_samples must be >= 1");
    if (true_systems.size() != submodels.size()) throw DimensionError("error_bound_report: subsystem count mismatch");
    const SubsystemLayout& layout = true_coupling.layout();
    if (!(layout == learned_coupling.layout())) throw DimensionError("error_bound_report: coupling layouts differ");
    domain.validate(layout);

    const CompositeModel truth(true_systems, true_coupling);
    const CompositeModel model(submodels, learned_coupling);
    const std::size_t k = layout.size();

    BoundReport rep;
    rep.eps.assign(k, 0.0);
    rep.eta.assign(k, 0.0);
    rep.gamma = Mat::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    rep.sigma = rep.gamma;
    rep.samples = n_samples;
    rep.seed = seed;
    rep.domain = domain;

    Vec x(layout.total_state_dim()), u(layout.total_control_dim());
    std::vector<Vec> true_grad(k), model_grad(k);
    for (std::size_t s = 0; s < n_samples; ++s) {
        Rng rng(derive_seed(seed, s));
        for (std::size_t i = 0; i < k; ++i) {
            for (int a = 0; a < layout.state_dim(i); ++a)
                x(layout.state_offset(i) + a) = rng.uniform(domain.state_lower[i](a), domain.state_upper[i](a));
            for (int a = 0; a < layout.control_dim(i); ++a)
                u(layout.control_offset(i) + a) = rng.uniform(domain.control_lower[i](a), domain.control_upper[i](a));
        }

        const double lhs = (truth.rhs(x, u) - model.rhs(x, u)).norm();
        if (lhs > rep.lhs_max) {
            rep.lhs_max = lhs;
            rep.lhs_argmax = s;
        }

        for (std::size_t i = 0; i < k; ++i) {
            const Vec xi = layout.state_slice(x, i);
            const Vec ui = layout.control_slice(u, i);
            rep.eps[i] = std::max(rep.eps[i], (true_systems[i].rhs(xi, ui) - submodels[i].rhs(xi, ui)).norm());
            true_grad[i] = true_systems[i].hamiltonian_gradient(xi);
            model_grad[i] = submodels[i].hamiltonian_gradient(xi);
            rep.eta[i] = std::max(rep.eta[i], (true_grad[i] - model_grad[i]).norm());
        }

        const Mat C = true_coupling.matrix(x);
        const Mat C_phi = learned_coupling.matrix(x);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                if (i == j) continue;
                const Mat block_phi = learned_coupling.block(C_phi, i, j);
                const Mat diff = true_coupling.block(C, i, j) - block_phi;
                const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
                rep.gamma(ii, jj) = std::max(rep.gamma(ii, jj), (diff * true_grad[j]).norm());
                rep.sigma(ii, jj) = std::max(rep.sigma(ii, jj), spectral_norm(block_phi));
            }
        }
    }

    for (std::size_t i = 0; i < k; ++i) {
        rep.rhs += rep.eps[i];
        rep.rhs_pairwise += rep.eps[i];
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
            const double term = rep.gamma(ii, jj) + rep.sigma(ii, jj) * rep.eta[j];
            rep.rhs += term;
            if (j > i) rep.rhs_pairwise += 2.0 * term;
        }
    }
    return rep;
}

}  // namespace phnn
