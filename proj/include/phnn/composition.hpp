#pragma once

#include <string>
#include <utility>
#include <vector>

#include "phnn/coupling.hpp"
#include "phnn/error.hpp"
#include "phnn/linalg.hpp"
#include "phnn/model.hpp"

namespace phnn {

/// k submodels joined through a coupling matrix:
///   H_c = Σ Hᵢ(xᵢ),  J_c(x) = Diag(Jᵢ) + C(x),  R_c = Diag(Rᵢ),  G_c = Diag(Gᵢ).
///
/// Exposes the same interface as PHNNModel. The trainable parameters are the
/// coupling parameters only; submodels stay frozen.
class CompositeModel {
public:
    CompositeModel(std::vector<PHNNModel> submodels, CouplingModel coupling)
        : submodels_(std::move(submodels)), coupling_(std::move(coupling)) {
        const auto& layout = coupling_.layout();
        if (layout.size() != submodels_.size())
            throw DimensionError("compose: coupling layout has " + std::to_string(layout.size()) + " subsystems, got " +
                                 std::to_string(submodels_.size()) + " submodels");
        for (std::size_t i = 0; i < submodels_.size(); ++i) {
            if (submodels_[i].state_dim() != layout.state_dim(i) || submodels_[i].control_dim() != layout.control_dim(i))
                throw DimensionError("compose: submodel " + std::to_string(i) + " does not match the layout");
        }
    }

    int state_dim() const noexcept { return coupling_.layout().total_state_dim(); }
    int control_dim() const noexcept { return coupling_.layout().total_control_dim(); }
    const SubsystemLayout& layout() const noexcept { return coupling_.layout(); }
    const std::vector<PHNNModel>& submodels() const noexcept { return submodels_; }
    const CouplingModel& coupling() const noexcept { return coupling_; }

    const ParameterVector& parameters() const noexcept { return coupling_.parameters(); }
    void set_parameters(const Eigen::Ref<const Vec>& values) { coupling_.set_parameters(values); }

    double hamiltonian(const Vec& x) const {
        check(x, "hamiltonian");
        double h = 0.0;
        for (std::size_t i = 0; i < submodels_.size(); ++i) h += submodels_[i].hamiltonian(layout().state_slice(x, i));
        return h;
    }

    Vec hamiltonian_gradient(const Vec& x) const {
        check(x, "hamiltonian_gradient");
        Vec g(state_dim());
        for (std::size_t i = 0; i < submodels_.size(); ++i)
            g.segment(layout().state_offset(i), layout().state_dim(i)) =
                submodels_[i].hamiltonian_gradient(layout().state_slice(x, i));
        return g;
    }

    Mat interconnection(const Vec& x) const {
        check(x, "interconnection");
        Mat J = coupling_.matrix(x);
        for (std::size_t i = 0; i < submodels_.size(); ++i)
            block(J, i) += submodels_[i].interconnection();
        return J;
    }

    Mat dissipation_matrix(const Vec& x) const {
        check(x, "dissipation_matrix");
        Mat R = Mat::Zero(state_dim(), state_dim());
        for (std::size_t i = 0; i < submodels_.size(); ++i)
            block(R, i) = submodels_[i].dissipation_matrix(layout().state_slice(x, i));
        return R;
    }

    Mat input_matrix(const Vec& x) const {
        check(x, "input_matrix");
        Mat G = Mat::Zero(state_dim(), control_dim());
        for (std::size_t i = 0; i < submodels_.size(); ++i)
            G.block(layout().state_offset(i), layout().control_offset(i), layout().state_dim(i), layout().control_dim(i)) =
                submodels_[i].input_matrix(layout().state_slice(x, i));
        return G;
    }

    Vec rhs(const Vec& x, const Vec& u) const {
        check(x, "rhs");
        detail::require_size(u.size(), control_dim(), "composite rhs control");
        const Vec out =
            PHNNModel::assemble_rhs(interconnection(x), dissipation_matrix(x), hamiltonian_gradient(x), input_matrix(x), u);
        if (!out.allFinite()) throw DivergenceError("composite rhs: non-finite value");
        return out;
    }

    Vec output(const Vec& x) const { return input_matrix(x).transpose() * hamiltonian_gradient(x); }

    PowerBalance power_balance(const Vec& x, const Vec& u) const {
        detail::require_size(u.size(), control_dim(), "composite power_balance control");
        const Vec g = hamiltonian_gradient(x);
        return {g.dot(rhs(x, u)), output(x).dot(u)};
    }

    /// wᵀ∂f/∂x through every submodel and the coupling; parameter part covers the coupling only.
    FieldVjp rhs_vjp(const Vec& x, const Vec& u, const Vec& w) const {
        check(x, "rhs_vjp");
        detail::require_size(u.size(), control_dim(), "composite rhs_vjp control");
        detail::require_size(w.size(), state_dim(), "composite rhs_vjp cotangent");
        const Mat C = coupling_.matrix(x);
        const Vec coupling_cot = C.transpose() * w;
        Vec grad(state_dim());
        FieldVjp out{Vec::Zero(state_dim()), Vec()};
        for (std::size_t i = 0; i < submodels_.size(); ++i) {
            const auto& L = layout();
            const Vec xi = L.state_slice(x, i);
            const Vec ui = L.control_slice(u, i);
            const Vec wi = L.state_slice(w, i);
            const Vec ci = L.state_slice(coupling_cot, i);
            const FieldVjp v = submodels_[i].rhs_vjp(xi, ui, wi, ci);
            out.state.segment(L.state_offset(i), L.state_dim(i)) += v.state;
            grad.segment(L.state_offset(i), L.state_dim(i)) = submodels_[i].hamiltonian_gradient(xi);
        }
        const auto cv = coupling_.vjp(x, w * grad.transpose());
        out.state += cv.state;
        out.params = cv.params;
        return out;
    }

private:
    Eigen::Block<Mat> block(Mat& M, std::size_t i) const {
        return M.block(layout().state_offset(i), layout().state_offset(i), layout().state_dim(i), layout().state_dim(i));
    }

    void check(const Vec& x, const char* where) const { detail::require_size(x.size(), state_dim(), where); }

    std::vector<PHNNModel> submodels_;
    CouplingModel coupling_;
};

/// Validates and assembles a composite model.
inline CompositeModel compose(std::vector<PHNNModel> submodels, CouplingModel coupling, const SubsystemLayout& layout) {
    if (!(layout == coupling.layout())) throw DimensionError("compose: coupling layout differs from the given layout");
    return CompositeModel(std::move(submodels), std::move(coupling));
}

inline SubsystemLayout layout_of(const std::vector<PHNNModel>& submodels) {
    std::vector<std::pair<int, int>> dims;
    for (const auto& m : submodels) dims.emplace_back(m.state_dim(), m.control_dim());
    return SubsystemLayout(std::move(dims));
}

}  // namespace phnn
