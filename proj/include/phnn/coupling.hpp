#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "phnn/error.hpp"
#include "phnn/linalg.hpp"
#include "phnn/mlp.hpp"
#include "phnn/parameters.hpp"

namespace phnn {

/// Per-subsystem (state, control) dimensions and the contiguous index ranges they occupy
/// inside the composite state and control vectors.
class SubsystemLayout {
public:
    SubsystemLayout() = default;

    explicit SubsystemLayout(std::vector<std::pair<int, int>> dims) : dims_(std::move(dims)) {
        if (dims_.empty()) throw ValidationError("SubsystemLayout: needs at least one subsystem");
        int n = 0, m = 0;
        for (const auto& [ni, mi] : dims_) {
            if (ni < 1 || mi < 0) throw ValidationError("SubsystemLayout: n_i must be >= 1 and m_i >= 0");
            state_offsets_.push_back(n);
            control_offsets_.push_back(m);
            n += ni;
            m += mi;
        }
        n_c_ = n;
        m_c_ = m;
    }

    std::size_t size() const noexcept { return dims_.size(); }
    const std::vector<std::pair<int, int>>& dims() const noexcept { return dims_; }
    int total_state_dim() const noexcept { return n_c_; }
    int total_control_dim() const noexcept { return m_c_; }

    int state_offset(std::size_t i) const { return state_offsets_.at(i); }
    int state_dim(std::size_t i) const { return dims_.at(i).first; }
    int control_offset(std::size_t i) const { return control_offsets_.at(i); }
    int control_dim(std::size_t i) const { return dims_.at(i).second; }

    /// Subsystem owning composite state index `index`.
    std::size_t subsystem_of(int index) const {
        for (std::size_t i = dims_.size(); i-- > 0;)
            if (index >= state_offsets_[i]) return i;
        throw DimensionError("SubsystemLayout: index out of range");
    }

    auto state_slice(const Vec& x, std::size_t i) const { return x.segment(state_offset(i), state_dim(i)); }
    auto control_slice(const Vec& u, std::size_t i) const { return u.segment(control_offset(i), control_dim(i)); }

    bool operator==(const SubsystemLayout& other) const { return dims_ == other.dims_; }

private:
    std::vector<std::pair<int, int>> dims_;
    std::vector<int> state_offsets_;
    std::vector<int> control_offsets_;
    int n_c_ = 0;
    int m_c_ = 0;
};

/// Composite-state index pairs (row, col) whose values determine a skew coupling matrix:
/// every entry of every off-diagonal block C_{I_i, I_j} with i < j, blocks in order, row-major.
inline std::vector<std::pair<int, int>> coupling_free_entries(const SubsystemLayout& layout) {
    std::vector<std::pair<int, int>> out;
    for (std::size_t i = 0; i < layout.size(); ++i)
        for (std::size_t j = i + 1; j < layout.size(); ++j)
            for (int a = 0; a < layout.state_dim(i); ++a)
                for (int b = 0; b < layout.state_dim(j); ++b)
                    out.emplace_back(layout.state_offset(i) + a, layout.state_offset(j) + b);
    return out;
}

enum class CouplingVariant { constant, state_dependent };

/// Skew-symmetric composition matrix C(x) with zero diagonal blocks.
///
/// Constant: parameters are the free entries (see coupling_free_entries); C is
/// assembled from them so both constraints hold exactly.
/// StateDependent: C(x) = A(x) − A(x)ᵀ with A an MLP emitting n_c² entries row-major,
/// diagonal blocks zeroed.
class CouplingModel {
public:
    static CouplingModel from_free_entries(SubsystemLayout layout, const Vec& values) {
        const auto free = coupling_free_entries(layout);
        detail::require_size(values.size(), static_cast<Eigen::Index>(free.size()), "coupling free entries");
        CouplingModel c;
        c.variant_ = CouplingVariant::constant;
        c.layout_ = std::move(layout);
        c.params_ = ParameterVector::single("coupling", values);
        c.rebuild_constant();
        return c;
    }

    /// Validates C exactly: square n_c, C + Cᵀ = 0, zero diagonal blocks.
    static CouplingModel constant(SubsystemLayout layout, const Mat& C) {
        const int n = layout.total_state_dim();
        if (C.rows() != n || C.cols() != n) throw DimensionError("coupling: matrix must be n_c x n_c");
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                if (C(a, b) + C(b, a) != 0.0) throw ValidationError("coupling: matrix is not skew-symmetric");
                if (layout.subsystem_of(a) == layout.subsystem_of(b) && C(a, b) != 0.0)
                    throw ValidationError("coupling: diagonal block of subsystem " +
                                          std::to_string(layout.subsystem_of(a)) + " is nonzero");
            }
        }
        const auto free = coupling_free_entries(layout);
        Vec values(static_cast<Eigen::Index>(free.size()));
        for (std::size_t k = 0; k < free.size(); ++k) values(static_cast<Eigen::Index>(k)) = C(free[k].first, free[k].second);
        return from_free_entries(std::move(layout), values);
    }

    static CouplingModel zero(SubsystemLayout layout) {
        const auto count = coupling_free_entries(layout).size();
        return from_free_entries(std::move(layout), Vec::Zero(static_cast<Eigen::Index>(count)));
    }

    static CouplingModel state_dependent(SubsystemLayout layout, MlpSpec spec, const Vec& params) {
        const int n = layout.total_state_dim();
        spec.validate();
        if (spec.input_dim != n || spec.output_dim != n * n)
            throw DimensionError("coupling: network must map R^{n_c} to R^{n_c^2}");
        detail::require_size(params.size(), static_cast<Eigen::Index>(spec.parameter_count()), "coupling network parameters");
        CouplingModel c;
        c.variant_ = CouplingVariant::state_dependent;
        c.layout_ = std::move(layout);
        c.spec_ = std::move(spec);
        c.params_ = ParameterVector::single("coupling", params);
        return c;
    }

    static CouplingModel state_dependent(SubsystemLayout layout, const std::vector<int>& hidden, std::uint64_t seed) {
        const int n = layout.total_state_dim();
        MlpSpec spec{n, hidden, n * n, Activation::tanh};
        return state_dependent(std::move(layout), spec, init_params(spec, seed).values());
    }

    CouplingVariant variant() const noexcept { return variant_; }
    bool is_constant() const noexcept { return variant_ == CouplingVariant::constant; }
    const SubsystemLayout& layout() const noexcept { return layout_; }
    const MlpSpec& network_spec() const noexcept { return spec_; }
    const ParameterVector& parameters() const noexcept { return params_; }
    int dim() const noexcept { return layout_.total_state_dim(); }

    void set_parameters(const Eigen::Ref<const Vec>& values) {
        params_.assign(values);
        if (is_constant()) rebuild_constant();
    }

    Mat matrix(const Vec& x) const {
        detail::require_size(x.size(), dim(), "coupling state");
        if (is_constant()) return constant_;
        const int n = dim();
        const Vec flat = mlp_forward(spec_, params_.values(), x);
        Mat C = Mat::Zero(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                if (layout_.subsystem_of(a) != layout_.subsystem_of(b)) C(a, b) = flat(a * n + b) - flat(b * n + a);
        return C;
    }

    /// The matrix of a constant coupling (no state needed).
    const Mat& constant_matrix() const {
        if (!is_constant()) throw ValidationError("coupling: not a constant coupling");
        return constant_;
    }

    struct Vjp {
        Vec state;
        Vec params;
    };

    /// ∇ of Σ_ab W_ab C_ab(x) with respect to x and the coupling parameters.
    Vjp vjp(const Vec& x, const Mat& W) const {
        const int n = dim();
        detail::require_size(x.size(), n, "coupling vjp state");
        if (W.rows() != n || W.cols() != n) throw DimensionError("coupling vjp: cotangent must be n_c x n_c");
        if (is_constant()) {
            const auto free = coupling_free_entries(layout_);
            Vec g(static_cast<Eigen::Index>(free.size()));
            for (std::size_t k = 0; k < free.size(); ++k) {
                const auto [a, b] = free[k];
                g(static_cast<Eigen::Index>(k)) = W(a, b) - W(b, a);
            }
            return {Vec::Zero(n), std::move(g)};
        }
        Vec dA = Vec::Zero(n * n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                if (layout_.subsystem_of(a) != layout_.subsystem_of(b)) dA(a * n + b) = W(a, b) - W(b, a);
        const MlpVjp v = mlp_vjp(spec_, params_.values(), x, dA);
        return {v.input_gradient, v.param_gradient};
    }

    /// Submatrix C_{I_i, I_j}(x).
    Mat block(const Mat& C, std::size_t i, std::size_t j) const {
        return C.block(layout_.state_offset(i), layout_.state_offset(j), layout_.state_dim(i), layout_.state_dim(j));
    }

private:
    void rebuild_constant() {
        const int n = dim();
        constant_ = Mat::Zero(n, n);
        const auto free = coupling_free_entries(layout_);
        for (std::size_t k = 0; k < free.size(); ++k) {
            const auto [a, b] = free[k];
            const double v = params_.values()(static_cast<Eigen::Index>(k));
            constant_(a, b) = v;
            constant_(b, a) = -v;
        }
    }

    CouplingVariant variant_ = CouplingVariant::constant;
    SubsystemLayout layout_;
    MlpSpec spec_;
    ParameterVector params_;
    Mat constant_;
};

/// Chain of 2-dimensional (Δq, p) subsystems: for each consecutive pair (i, i+1),
/// C(p_i, Δq_{i+1}) = 1 and C(Δq_{i+1}, p_i) = −1. All other entries zero.
inline CouplingModel chain_coupling(const SubsystemLayout& layout) {
    for (std::size_t i = 0; i < layout.size(); ++i)
        if (layout.state_dim(i) != 2)
            throw ValidationError("chain_coupling: subsystem " + std::to_string(i) + " is not 2-dimensional");
    const int n = layout.total_state_dim();
    Mat C = Mat::Zero(n, n);
    for (std::size_t i = 0; i + 1 < layout.size(); ++i) {
        const int p_i = layout.state_offset(i) + 1;
        const int q_next = layout.state_offset(i + 1);
        C(p_i, q_next) = 1.0;
        C(q_next, p_i) = -1.0;
    }
    return CouplingModel::constant(layout, C);
}

}  // namespace phnn
