#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "phnn/error.hpp"
#include "phnn/linalg.hpp"
#include "phnn/mlp.hpp"
#include "phnn/parameters.hpp"
#include "phnn/rng.hpp"

namespace phnn {

// ---------------------------------------------------------------------------
// Term parametrizations
// ---------------------------------------------------------------------------

/// Hamiltonian as a scalar-output MLP over the state.
struct MlpHamiltonian {
    MlpSpec spec;
};

/// Closed-form Hamiltonian ("oracle mode"). `hessian_vector(x, r)` returns ∇²H(x)·r.
struct OracleHamiltonian {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;
    std::function<Vec(const Vec&, const Vec&)> hessian_vector;
};

using HamiltonianTerm = std::variant<MlpHamiltonian, OracleHamiltonian>;

/// Constant R = LLᵀ, L built from n(n+1)/2 raw entries.
struct ConstantCholesky {};

/// State-dependent R(x) = L(x)L(x)ᵀ, the raw entries of L emitted by an MLP.
struct MlpCholesky {
    MlpSpec spec;
};

/// Closed-form dissipation. `state_vjp(x, W)` returns ∇ₓ Σᵢⱼ Wᵢⱼ Rᵢⱼ(x); empty means R is constant.
struct OracleDissipation {
    std::function<Mat(const Vec&)> value;
    std::function<Vec(const Vec&, const Mat&)> state_vjp;
};

using DissipationTerm = std::variant<ConstantCholesky, MlpCholesky, OracleDissipation>;

/// Constant G with n·m entries stored row-major.
struct ConstantMatrix {};

/// State-dependent G(x), entries emitted row-major by an MLP.
struct MlpMatrix {
    MlpSpec spec;
};

/// Closed-form input matrix. `state_vjp(x, W)` returns ∇ₓ Σᵢⱼ Wᵢⱼ Gᵢⱼ(x); empty means G is constant.
struct OracleInputMap {
    std::function<Mat(const Vec&)> value;
    std::function<Vec(const Vec&, const Mat&)> state_vjp;
};

using InputTerm = std::variant<ConstantMatrix, MlpMatrix, OracleInputMap>;

constexpr int cholesky_entry_count(int n) { return n * (n + 1) / 2; }

/// Lower-triangular factor from raw entries in row-major lower order (0,0),(1,0),(1,1),(2,0),...
/// Diagonal entries are squared so the factor has a non-negative diagonal.
inline Mat cholesky_factor_from_raw(const Eigen::Ref<const Vec>& raw, int n) {
    detail::require_size(raw.size(), cholesky_entry_count(n), "cholesky raw entries");
    Mat L = Mat::Zero(n, n);
    Eigen::Index k = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j, ++k) L(i, j) = (i == j) ? raw(k) * raw(k) : raw(k);
    }
    return L;
}

/// Raw-entry cotangent given the cotangent of L.
inline Vec cholesky_raw_cotangent(const Eigen::Ref<const Vec>& raw, const Mat& factor_cotangent, int n) {
    Vec out(cholesky_entry_count(n));
    Eigen::Index k = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j, ++k)
            out(k) = (i == j) ? 2.0 * raw(k) * factor_cotangent(i, j) : factor_cotangent(i, j);
    }
    return out;
}

/// dH/dt along the model flow and the externally supplied power yᵀu.
struct PowerBalance {
    double dH_dt = 0.0;
    double supplied = 0.0;
};

/// Reverse-mode derivative of wᵀf(x, u; θ).
struct FieldVjp {
    Vec state;
    Vec params;
};

// ---------------------------------------------------------------------------
// PHNNModel
// ---------------------------------------------------------------------------

/// Port-Hamiltonian neural network:
///   ẋ = [J − R_θ(x)] ∇H_θ(x) + G_θ(x) u,   y = G_θ(x)ᵀ ∇H_θ(x)
/// with J fixed and skew-symmetric, R_θ = L_θL_θᵀ.
///
/// Parameters live in one flat vector with slices "hamiltonian", "dissipation"
/// and "input_map" (zero length for oracle terms).
class PHNNModel {
public:
    PHNNModel(int state_dim, int control_dim, Mat interconnection, HamiltonianTerm hamiltonian,
              DissipationTerm dissipation, InputTerm input_map, ParameterVector params)
        : n_(state_dim),
          m_(control_dim),
          J_(std::move(interconnection)),
          H_(std::move(hamiltonian)),
          R_(std::move(dissipation)),
          G_(std::move(input_map)),
          params_(std::move(params)) {
        validate();
    }

    /// Fresh model with initialized parameters: MLP terms Glorot-uniform, constant terms uniform(±0.1).
    static PHNNModel create(int state_dim, int control_dim, Mat interconnection, HamiltonianTerm hamiltonian,
                            DissipationTerm dissipation, InputTerm input_map, std::uint64_t seed) {
        auto h = init_term(hamiltonian, derive_seed(seed, 0), 0);
        auto r = init_term(dissipation, derive_seed(seed, 1), cholesky_entry_count(state_dim));
        auto g = init_term(input_map, derive_seed(seed, 2), state_dim * control_dim);
        auto params = ParameterVector::concat({{"hamiltonian", h}, {"dissipation", r}, {"input_map", g}});
        return PHNNModel(state_dim, control_dim, std::move(interconnection), std::move(hamiltonian),
                         std::move(dissipation), std::move(input_map), std::move(params));
    }

    int state_dim() const noexcept { return n_; }
    int control_dim() const noexcept { return m_; }
    const Mat& interconnection() const noexcept { return J_; }
    const HamiltonianTerm& hamiltonian_term() const noexcept { return H_; }
    const DissipationTerm& dissipation_term() const noexcept { return R_; }
    const InputTerm& input_term() const noexcept { return G_; }
    const ParameterVector& parameters() const noexcept { return params_; }

    bool is_oracle() const {
        return std::holds_alternative<OracleHamiltonian>(H_) || std::holds_alternative<OracleDissipation>(R_) ||
               std::holds_alternative<OracleInputMap>(G_);
    }

    void set_parameters(const Eigen::Ref<const Vec>& values) { params_.assign(values); }

    PHNNModel with_parameters(const Eigen::Ref<const Vec>& values) const {
        PHNNModel copy = *this;
        copy.set_parameters(values);
        return copy;
    }

    double hamiltonian(const Vec& x) const {
        check_state_dim(x, "hamiltonian");
        if (const auto* o = std::get_if<OracleHamiltonian>(&H_)) return o->value(x);
        const auto& spec = std::get<MlpHamiltonian>(H_).spec;
        return mlp_forward(spec, params_.segment("hamiltonian"), x)(0);
    }

    Vec hamiltonian_gradient(const Vec& x) const {
        check_state_dim(x, "hamiltonian_gradient");
        if (const auto* o = std::get_if<OracleHamiltonian>(&H_)) return o->gradient(x);
        const auto& spec = std::get<MlpHamiltonian>(H_).spec;
        return mlp_scalar_gradient(spec, params_.segment("hamiltonian"), x);
    }

    /// ∇H(x) together with the derivatives of rᵀ∇H(x) in x and in the parameters.
    GradientVjp hamiltonian_gradient_vjp(const Vec& x, const Vec& r) const {
        check_state_dim(x, "hamiltonian_gradient_vjp");
        detail::require_size(r.size(), n_, "hamiltonian_gradient_vjp direction");
        if (const auto* o = std::get_if<OracleHamiltonian>(&H_)) return {o->gradient(x), o->hessian_vector(x, r), Vec()};
        const auto& spec = std::get<MlpHamiltonian>(H_).spec;
        return mlp_gradient_vjp(spec, params_.segment("hamiltonian"), x, r);
    }

    /// Raw entries of the dissipation factor at x (empty for oracle dissipation).
    Vec dissipation_raw(const Vec& x) const {
        return std::visit(
            [&](const auto& term) -> Vec {
                using T = std::decay_t<decltype(term)>;
                if constexpr (std::is_same_v<T, ConstantCholesky>) return params_.segment("dissipation");
                else if constexpr (std::is_same_v<T, MlpCholesky>)
                    return mlp_forward(term.spec, params_.segment("dissipation"), x);
                else return Vec();
            },
            R_);
    }

    Mat dissipation_matrix(const Vec& x) const {
        check_state_dim(x, "dissipation_matrix");
        if (const auto* o = std::get_if<OracleDissipation>(&R_)) return o->value(x);
        const Mat L = cholesky_factor_from_raw(dissipation_raw(x), n_);
        return L * L.transpose();
    }

    Mat input_matrix(const Vec& x) const {
        check_state_dim(x, "input_matrix");
        return std::visit(
            [&](const auto& term) -> Mat {
                using T = std::decay_t<decltype(term)>;
                if constexpr (std::is_same_v<T, ConstantMatrix>) {
                    const Vec flat = params_.segment("input_map");
                    return Eigen::Map<const RowMajorMat>(flat.data(), n_, m_);
                } else if constexpr (std::is_same_v<T, MlpMatrix>) {
                    const Vec flat = mlp_forward(term.spec, params_.segment("input_map"), x);
                    return Eigen::Map<const RowMajorMat>(flat.data(), n_, m_);
                } else {
                    return term.value(x);
                }
            },
            G_);
    }

    /// [J − R(x)]∇H(x) + G(x)u.
    Vec rhs(const Vec& x, const Vec& u) const {
        check_state_dim(x, "rhs");
        detail::require_size(u.size(), m_, "rhs control");
        const Vec out = assemble_rhs(J_, dissipation_matrix(x), hamiltonian_gradient(x), input_matrix(x), u);
        if (!out.allFinite()) throw DivergenceError("rhs: non-finite value");
        return out;
    }

    /// y = G(x)ᵀ∇H(x).
    Vec output(const Vec& x) const {
        check_state_dim(x, "output");
        return input_matrix(x).transpose() * hamiltonian_gradient(x);
    }

    PowerBalance power_balance(const Vec& x, const Vec& u) const {
        detail::require_size(u.size(), m_, "power_balance control");
        const Vec grad = hamiltonian_gradient(x);
        const Vec f = rhs(x, u);
        return {grad.dot(f), output(x).dot(u)};
    }

    /// wᵀ∂f/∂x and wᵀ∂f/∂θ for f = rhs(x, u).
    ///
    /// `extra_gradient_cotangent`, when non-empty, is added to the cotangent of
    /// ∇H(x); a composite model routes its coupling term through it.
    FieldVjp rhs_vjp(const Vec& x, const Vec& u, const Vec& w, const Vec& extra_gradient_cotangent = Vec()) const {
        check_state_dim(x, "rhs_vjp");
        detail::require_size(u.size(), m_, "rhs_vjp control");
        detail::require_size(w.size(), n_, "rhs_vjp cotangent");

        FieldVjp out{Vec::Zero(n_), Vec::Zero(static_cast<Eigen::Index>(params_.size()))};
        const Mat R = dissipation_matrix(x);

        // Hamiltonian: cotangent of ∇H is (J − R)ᵀw.
        Vec grad_cot = (J_ - R).transpose() * w;
        if (extra_gradient_cotangent.size() > 0) {
            detail::require_size(extra_gradient_cotangent.size(), n_, "rhs_vjp extra cotangent");
            grad_cot += extra_gradient_cotangent;
        }
        const GradientVjp gv = hamiltonian_gradient_vjp(x, grad_cot);
        out.state += gv.input_gradient;
        add_to_slice(out.params, "hamiltonian", gv.param_gradient);

        // Dissipation: f contains −R∇H, so dR = −w ∇Hᵀ.
        const Mat dR = -w * gv.gradient.transpose();
        std::visit(
            [&](const auto& term) {
                using T = std::decay_t<decltype(term)>;
                if constexpr (std::is_same_v<T, OracleDissipation>) {
                    if (term.state_vjp) out.state += term.state_vjp(x, dR);
                } else {
                    const Vec raw = dissipation_raw(x);
                    const Mat L = cholesky_factor_from_raw(raw, n_);
                    const Mat dL = (dR + dR.transpose()) * L;
                    const Vec draw = cholesky_raw_cotangent(raw, dL, n_);
                    if constexpr (std::is_same_v<T, ConstantCholesky>) {
                        add_to_slice(out.params, "dissipation", draw);
                    } else {
                        const MlpVjp v = mlp_vjp(term.spec, params_.segment("dissipation"), x, draw);
                        out.state += v.input_gradient;
                        add_to_slice(out.params, "dissipation", v.param_gradient);
                    }
                }
            },
            R_);

        // Input map: dG = w uᵀ.
        const Mat dG = w * u.transpose();
        std::visit(
            [&](const auto& term) {
                using T = std::decay_t<decltype(term)>;
                if constexpr (std::is_same_v<T, OracleInputMap>) {
                    if (term.state_vjp) out.state += term.state_vjp(x, dG);
                } else {
                    const RowMajorMat dG_rm = dG;
                    const Eigen::Map<const Vec> flat(dG_rm.data(), dG_rm.size());
                    if constexpr (std::is_same_v<T, ConstantMatrix>) {
                        add_to_slice(out.params, "input_map", flat);
                    } else {
                        const MlpVjp v = mlp_vjp(term.spec, params_.segment("input_map"), x, flat);
                        out.state += v.input_gradient;
                        add_to_slice(out.params, "input_map", v.param_gradient);
                    }
                }
            },
            G_);
        return out;
    }

    /// Σᵢ [Σⱼ (Jᵢⱼ − Rᵢⱼ) gⱼ + Σₐ Gᵢₐ uₐ], evaluated entry by entry in a fixed order so
    /// that models and closed-form simulators sharing the same terms agree bit for bit.
    static Vec assemble_rhs(const Mat& J, const Mat& R, const Vec& grad, const Mat& G, const Vec& u) {
        const Eigen::Index n = grad.size();
        Vec out(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double s = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) s += (J(i, j) - R(i, j)) * grad(j);
            for (Eigen::Index a = 0; a < u.size(); ++a) s += G(i, a) * u(a);
            out(i) = s;
        }
        return out;
    }

private:
    template <class Term>
    static Vec init_term(const Term& term, std::uint64_t seed, int constant_size) {
        return std::visit(
            [&](const auto& t) -> Vec {
                using T = std::decay_t<decltype(t)>;
                if constexpr (std::is_same_v<T, MlpHamiltonian> || std::is_same_v<T, MlpCholesky> ||
                              std::is_same_v<T, MlpMatrix>) {
                    return init_params(t.spec, seed).values();
                } else if constexpr (std::is_same_v<T, ConstantCholesky> || std::is_same_v<T, ConstantMatrix>) {
                    Rng rng(seed);
                    Vec v(constant_size);
                    for (auto& e : v) e = rng.uniform(-0.1, 0.1);
                    return v;
                } else {
                    return Vec();
                }
            },
            term);
    }

    void add_to_slice(Vec& target, const char* name, const Eigen::Ref<const Vec>& g) const {
        if (g.size() == 0) return;
        const Slice& s = params_.slice(name);
        target.segment(static_cast<Eigen::Index>(s.offset), static_cast<Eigen::Index>(s.length)) += g;
    }

    void check_state_dim(const Vec& x, const char* where) const { detail::require_size(x.size(), n_, where); }

    std::size_t expected_slice_length(const char* name) const {
        if (std::string(name) == "hamiltonian") {
            if (const auto* t = std::get_if<MlpHamiltonian>(&H_)) return t->spec.parameter_count();
            return 0;
        }
        if (std::string(name) == "dissipation") {
            if (std::holds_alternative<ConstantCholesky>(R_)) return static_cast<std::size_t>(cholesky_entry_count(n_));
            if (const auto* t = std::get_if<MlpCholesky>(&R_)) return t->spec.parameter_count();
            return 0;
        }
        if (std::holds_alternative<ConstantMatrix>(G_)) return static_cast<std::size_t>(n_ * m_);
        if (const auto* t = std::get_if<MlpMatrix>(&G_)) return t->spec.parameter_count();
        return 0;
    }

    void validate() const {
        if (n_ < 1 || m_ < 0) throw ValidationError("PHNNModel: state_dim must be >= 1 and control_dim >= 0");
        if (J_.rows() != n_ || J_.cols() != n_) throw DimensionError("PHNNModel: interconnection must be n x n");
        for (Eigen::Index i = 0; i < n_; ++i)
            for (Eigen::Index j = 0; j < n_; ++j)
                if (J_(i, j) + J_(j, i) != 0.0)
                    throw ValidationError("PHNNModel: interconnection matrix is not skew-symmetric");
        if (const auto* t = std::get_if<MlpHamiltonian>(&H_)) {
            t->spec.validate();
            if (t->spec.input_dim != n_ || t->spec.output_dim != 1)
                throw DimensionError("PHNNModel: Hamiltonian network must map R^n to R");
        } else {
            const auto& o = std::get<OracleHamiltonian>(H_);
            if (!o.value || !o.gradient || !o.hessian_vector)
                throw ValidationError("PHNNModel: oracle Hamiltonian needs value, gradient and hessian_vector");
        }
        if (const auto* t = std::get_if<MlpCholesky>(&R_)) {
            t->spec.validate();
            if (t->spec.input_dim != n_ || t->spec.output_dim != cholesky_entry_count(n_))
                throw DimensionError("PHNNModel: dissipation network must map R^n to R^{n(n+1)/2}");
        } else if (const auto* o = std::get_if<OracleDissipation>(&R_); o && !o->value) {
            throw ValidationError("PHNNModel: oracle dissipation needs a value function");
        }
        if (const auto* t = std::get_if<MlpMatrix>(&G_)) {
            t->spec.validate();
            if (t->spec.input_dim != n_ || t->spec.output_dim != n_ * m_)
                throw DimensionError("PHNNModel: input-map network must map R^n to R^{n m}");
        } else if (const auto* o = std::get_if<OracleInputMap>(&G_); o && !o->value) {
            throw ValidationError("PHNNModel: oracle input map needs a value function");
        }
        for (const char* name : {"hamiltonian", "dissipation", "input_map"}) {
            if (!params_.has(name)) throw ValidationError(std::string("PHNNModel: parameters lack slice '") + name + "'");
            if (params_.slice(name).length != expected_slice_length(name))
                throw DimensionError(std::string("PHNNModel: slice '") + name + "' has wrong length");
        }
    }

    int n_;
    int m_;
    Mat J_;
    HamiltonianTerm H_;
    DissipationTerm R_;
    InputTerm G_;
    ParameterVector params_;
};

/// Canonical 2x2 interconnection [[0, 1], [−1, 0]] for a (position, momentum) state.
inline Mat canonical_interconnection() {
    Mat J(2, 2);
    J << 0.0, 1.0, -1.0, 0.0;
    return J;
}

/// Hamiltonian and dissipation as tanh MLPs, constant input matrix.
inline PHNNModel make_default_model(int state_dim, int control_dim, Mat interconnection,
                                    const std::vector<int>& hidden, std::uint64_t seed) {
    MlpSpec h{state_dim, hidden, 1, Activation::tanh};
    MlpSpec r{state_dim, hidden, cholesky_entry_count(state_dim), Activation::tanh};
    return PHNNModel::create(state_dim, control_dim, std::move(interconnection), MlpHamiltonian{h},
                             MlpCholesky{r}, ConstantMatrix{}, seed);
}

}  // namespace phnn
