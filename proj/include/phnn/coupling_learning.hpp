#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "phnn/composition.hpp"
#include "phnn/coupling.hpp"
#include "phnn/dataset.hpp"
#include "phnn/error.hpp"
#include "phnn/training.hpp"

namespace phnn {

/// A composite state/control with its (measured or exact) time derivative.
struct DerivativeSample {
    Vec state;
    Vec control;
    Vec derivative;
};

/// (x_{i+1} − x_i) / (t_{i+1} − t_i) for every consecutive pair, attached to the
/// midpoint state (x_i + x_{i+1}) / 2 where the quotient is second-order accurate.
/// The control is held over the step, so u_i applies unchanged.
inline std::vector<DerivativeSample> finite_difference_samples(const Dataset& d) {
    validate_dataset(d);
    std::vector<DerivativeSample> out;
    for (const auto& tr : transitions(d))
        out.push_back({0.5 * (tr.state + tr.next_state), tr.control, (tr.next_state - tr.state) / (tr.t1 - tr.t0)});
    return out;
}

struct CouplingFit {
    CouplingModel coupling;
    double residual_norm = 0.0;  ///< ‖A c − b‖ at the solution
    Vec singular_values;         ///< of the regressor, descending
    double condition_number = 0.0;
    std::size_t equations = 0;
};

/// Relative singular-value cutoff below which a direction counts as unidentified.
inline constexpr double kRankTolerance = 1e-10;

/// Least-squares fit of a constant coupling to derivative samples.
///
/// With the submodels fixed, each sample gives
///   ẋ − [Diag(Jᵢ) − R_c(x)]∇H_c(x) − G_c(x)u  ≈  C ∇H_c(x),
/// linear in the free entries of C. The problem is solved by SVD; a
/// numerically rank-deficient regressor raises RankDeficiencyError with the
/// unidentifiable directions.
inline CouplingFit learn_coupling_lsq(const std::vector<PHNNModel>& submodels, const SubsystemLayout& layout,
                                      std::span<const DerivativeSample> samples) {
    if (samples.empty()) throw ValidationError("learn_coupling_lsq: no samples");
    const CompositeModel decoupled(submodels, CouplingModel::zero(layout));
    const auto free = coupling_free_entries(layout);
    const Eigen::Index n = layout.total_state_dim();
    const auto unknowns = static_cast<Eigen::Index>(free.size());
    if (unknowns == 0) throw ValidationError("learn_coupling_lsq: a single subsystem has no coupling to learn");

    const auto rows = static_cast<Eigen::Index>(samples.size()) * n;
    Mat A = Mat::Zero(rows, unknowns);
    Vec b(rows);
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const auto& smp = samples[s];
        detail::require_size(smp.state.size(), n, "learn_coupling_lsq state");
        detail::require_size(smp.derivative.size(), n, "learn_coupling_lsq derivative");
        const Eigen::Index r0 = static_cast<Eigen::Index>(s) * n;
        b.segment(r0, n) = smp.derivative - decoupled.rhs(smp.state, smp.control);
        const Vec g = decoupled.hamiltonian_gradient(smp.state);
        for (Eigen::Index k = 0; k < unknowns; ++k) {
            const auto [row, col] = free[static_cast<std::size_t>(k)];
            // C = Σ c_k (e_row e_colᵀ − e_col e_rowᵀ)
            A(r0 + row, k) += g(col);
            A(r0 + col, k) -= g(row);
        }
    }

    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const Vec sv = svd.singularValues();
    const double largest = sv.size() > 0 ? sv(0) : 0.0;
    const double cutoff = kRankTolerance * largest;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff && sv(i) > 0.0) ++rank;
    if (rank < unknowns) {
        const Mat null_space = svd.matrixV().rightCols(unknowns - rank);
        throw RankDeficiencyError("learn_coupling_lsq: regressor has rank " + std::to_string(rank) + " but " +
                                      std::to_string(unknowns) + " free coupling entries; " +
                                      std::to_string(unknowns - rank) + " direction(s) are unidentifiable",
                                  null_space);
    }
    svd.setThreshold(kRankTolerance);
    const Vec c = svd.solve(b);

    CouplingFit fit{CouplingModel::from_free_entries(layout, c), (A * c - b).norm(), sv,
                    sv(0) / sv(unknowns - 1), static_cast<std::size_t>(rows)};
    return fit;
}

/// Least-squares coupling from a composite dataset using finite-difference derivatives.
inline CouplingFit learn_coupling_lsq(const std::vector<PHNNModel>& submodels, const SubsystemLayout& layout,
                                      const Dataset& composite_data) {
    if (composite_data.transition_count() == 0) throw ValidationError("learn_coupling_lsq: dataset has no transitions");
    const auto samples = finite_difference_samples(composite_data);
    return learn_coupling_lsq(submodels, layout, std::span<const DerivativeSample>(samples));
}

struct CouplingTrainResult {
    CouplingModel coupling;
    std::vector<double> history;
};

/// Trains a state-dependent coupling C_φ(x) = A_φ(x) − A_φ(x)ᵀ by Adam on the composite
/// one-step prediction loss with the submodels frozen.
inline CouplingTrainResult learn_coupling_nn(const std::vector<PHNNModel>& submodels, const SubsystemLayout& layout,
                                             const Dataset& composite_data, const TrainConfig& train_cfg,
                                             const SolverConfig& solver_cfg, const std::vector<int>& hidden = {32, 32}) {
    auto initial = CouplingModel::state_dependent(layout, hidden, derive_seed(train_cfg.seed, 0x636f75706c65ULL));
    CompositeModel model(submodels, std::move(initial));
    auto result = train(std::move(model), composite_data, train_cfg, solver_cfg);
    return {result.model.coupling(), std::move(result.history)};
}

}  // namespace phnn
