#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "phnn/bound.hpp"
#include "phnn/coupling.hpp"
#include "phnn/dataset.hpp"
#include "phnn/error.hpp"
#include "phnn/forcing.hpp"
#include "phnn/linalg.hpp"
#include "phnn/mlp.hpp"
#include "phnn/model.hpp"
#include "phnn/parameters.hpp"

namespace phnn {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

namespace detail {

inline void write_atomically(const std::filesystem::path& path, const std::string& contents) {
    namespace fs = std::filesystem;
    if (path.has_parent_path() && !fs::exists(path.parent_path()))
        throw Error("cannot write " + path.string() + ": directory does not exist");
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out << contents;
        out.flush();
        if (!out) throw Error("write to " + tmp.string() + " failed");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error("cannot move " + tmp.string() + " to " + path.string());
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json parse_document(const std::filesystem::path& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

inline void check_version(const json& j, const std::string& what) {
    if (!j.is_object() || !j.contains("format_version")) throw FormatError(what + ": missing format_version");
    const int v = j.at("format_version").get<int>();
    if (v != kFormatVersion)
        throw FormatError(what + ": unsupported format_version " + std::to_string(v) + " (expected " +
                          std::to_string(kFormatVersion) + ")");
}

/// Wraps schema errors (missing keys, wrong types) as FormatError.
template <class F>
auto with_schema(const std::string& what, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw FormatError(what + ": " + e.what());
    }
}

inline json vec_to_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Vec vec_from_json(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline json mat_to_json(const Mat& m) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) flat.push_back(m(i, j));
    return flat;
}

inline Mat mat_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
    const auto flat = j.get<std::vector<double>>();
    if (static_cast<Eigen::Index>(flat.size()) != rows * cols)
        throw DimensionError("matrix has " + std::to_string(flat.size()) + " entries, expected " +
                             std::to_string(rows * cols));
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = flat[static_cast<std::size_t>(i * cols + j)];
    return m;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Component encodings
// ---------------------------------------------------------------------------

inline json to_json(const MlpSpec& s) {
    return {{"input_dim", s.input_dim}, {"hidden", s.hidden}, {"output_dim", s.output_dim},
            {"activation", to_string(s.activation)}};
}

inline MlpSpec mlp_spec_from_json(const json& j) {
    MlpSpec s{j.at("input_dim").get<int>(), j.at("hidden").get<std::vector<int>>(), j.at("output_dim").get<int>(),
              activation_from_string(j.value("activation", std::string("tanh")))};
    s.validate();
    return s;
}

inline json to_json(const ForcingSpec& spec) {
    json arr = json::array();
    for (const auto& ch : spec) {
        if (const auto* s = std::get_if<SinusoidForcing>(&ch))
            arr.push_back({{"type", "sinusoid"},
                           {"amplitude", s->amplitude},
                           {"angular_frequency", s->angular_frequency},
                           {"phase", s->phase}});
        else
            arr.push_back({{"type", "zero"}});
    }
    return arr;
}

inline ForcingSpec forcing_from_json(const json& j) {
    ForcingSpec spec;
    for (const auto& ch : j) {
        const auto type = ch.at("type").get<std::string>();
        if (type == "zero")
            spec.emplace_back(ZeroForcing{});
        else if (type == "sinusoid")
            spec.emplace_back(SinusoidForcing{ch.at("amplitude").get<double>(), ch.at("angular_frequency").get<double>(),
                                              ch.value("phase", 0.0)});
        else
            throw ValidationError("forcing: unknown channel type '" + type + "'");
    }
    validate_forcing(spec);
    return spec;
}

inline json to_json(const SubsystemLayout& layout) {
    json arr = json::array();
    for (const auto& [n, m] : layout.dims()) arr.push_back({{"state_dim", n}, {"control_dim", m}});
    return arr;
}

inline SubsystemLayout layout_from_json(const json& j) {
    std::vector<std::pair<int, int>> dims;
    for (const auto& e : j) dims.emplace_back(e.at("state_dim").get<int>(), e.at("control_dim").get<int>());
    return SubsystemLayout(std::move(dims));
}

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

inline json dataset_to_json(const Dataset& d) {
    json trajs = json::array();
    for (const auto& tr : d.trajectories) {
        json xs = json::array(), us = json::array();
        for (const auto& x : tr.states) xs.push_back(detail::vec_to_json(x));
        for (const auto& u : tr.controls) us.push_back(detail::vec_to_json(u));
        trajs.push_back({{"t", tr.times}, {"x", std::move(xs)}, {"u", std::move(us)}});
    }
    return {{"format_version", kFormatVersion},
            {"metadata",
             {{"dt", d.metadata.dt},
              {"system", d.metadata.system},
              {"seed", d.metadata.seed},
              {"forcing", to_json(d.metadata.forcing)}}},
            {"trajectories", std::move(trajs)}};
}

inline Dataset dataset_from_json(const json& j) {
    detail::check_version(j, "dataset");
    Dataset d = detail::with_schema("dataset", [&] {
        Dataset out;
        const auto& meta = j.at("metadata");
        out.metadata.dt = meta.at("dt").get<double>();
        out.metadata.system = meta.value("system", std::string());
        out.metadata.seed = meta.value("seed", std::uint64_t{0});
        out.metadata.forcing = forcing_from_json(meta.value("forcing", json::array()));
        for (const auto& tj : j.at("trajectories")) {
            Trajectory tr;
            tr.times = tj.at("t").get<std::vector<double>>();
            for (const auto& x : tj.at("x")) tr.states.push_back(detail::vec_from_json(x));
            for (const auto& u : tj.at("u")) tr.controls.push_back(detail::vec_from_json(u));
            out.trajectories.push_back(std::move(tr));
        }
        return out;
    });
    validate_dataset(d);
    return d;
}

inline void save_dataset(const Dataset& d, const std::filesystem::path& path) {
    validate_dataset(d);
    detail::write_atomically(path, dataset_to_json(d).dump());
}

inline Dataset load_dataset(const std::filesystem::path& path) { return dataset_from_json(detail::parse_document(path)); }

// ---------------------------------------------------------------------------
// Model checkpoints
// ---------------------------------------------------------------------------

inline json model_to_json(const PHNNModel& model) {
    if (model.is_oracle()) throw ValidationError("save_model: closed-form (oracle) terms cannot be serialized");
    json h = {{"type", "mlp"}, {"network", to_json(std::get<MlpHamiltonian>(model.hamiltonian_term()).spec)}};
    json r = std::holds_alternative<ConstantCholesky>(model.dissipation_term())
                 ? json{{"type", "constant_cholesky"}}
                 : json{{"type", "mlp_cholesky"}, {"network", to_json(std::get<MlpCholesky>(model.dissipation_term()).spec)}};
    json g = std::holds_alternative<ConstantMatrix>(model.input_term())
                 ? json{{"type", "constant_matrix"}}
                 : json{{"type", "mlp_matrix"}, {"network", to_json(std::get<MlpMatrix>(model.input_term()).spec)}};
    json layout = json::array();
    for (const auto& s : model.parameters().layout())
        layout.push_back({{"name", s.name}, {"offset", s.offset}, {"length", s.length}});
    return {{"format_version", kFormatVersion},
            {"state_dim", model.state_dim()},
            {"control_dim", model.control_dim()},
            {"interconnection", detail::mat_to_json(model.interconnection())},
            {"hamiltonian_spec", std::move(h)},
            {"dissipation_spec", std::move(r)},
            {"input_spec", std::move(g)},
            {"parameters", detail::vec_to_json(model.parameters().values())},
            {"layout", std::move(layout)}};
}

inline PHNNModel model_from_json(const json& j) {
    detail::check_version(j, "model");
    return detail::with_schema("model", [&] {
        const int n = j.at("state_dim").get<int>();
        const int m = j.at("control_dim").get<int>();
        if (n < 1 || m < 0) throw ValidationError("model: invalid state_dim/control_dim");
        Mat J = detail::mat_from_json(j.at("interconnection"), n, n);

        const auto& hs = j.at("hamiltonian_spec");
        if (hs.at("type").get<std::string>() != "mlp") throw FormatError("model: unknown hamiltonian_spec type");
        HamiltonianTerm H = MlpHamiltonian{mlp_spec_from_json(hs.at("network"))};

        const auto& rs = j.at("dissipation_spec");
        const auto rtype = rs.at("type").get<std::string>();
        DissipationTerm R;
        if (rtype == "constant_cholesky")
            R = ConstantCholesky{};
        else if (rtype == "mlp_cholesky")
            R = MlpCholesky{mlp_spec_from_json(rs.at("network"))};
        else
            throw FormatError("model: unknown dissipation_spec type '" + rtype + "'");

        const auto& gs = j.at("input_spec");
        const auto gtype = gs.at("type").get<std::string>();
        InputTerm G;
        if (gtype == "constant_matrix")
            G = ConstantMatrix{};
        else if (gtype == "mlp_matrix")
            G = MlpMatrix{mlp_spec_from_json(gs.at("network"))};
        else
            throw FormatError("model: unknown input_spec type '" + gtype + "'");

        std::vector<Slice> layout;
        for (const auto& s : j.at("layout"))
            layout.push_back({s.at("name").get<std::string>(), s.at("offset").get<std::size_t>(),
                              s.at("length").get<std::size_t>()});
        ParameterVector params(detail::vec_from_json(j.at("parameters")), std::move(layout));
        return PHNNModel(n, m, std::move(J), std::move(H), std::move(R), std::move(G), std::move(params));
    });
}

inline void save_model(const PHNNModel& model, const std::filesystem::path& path) {
    detail::write_atomically(path, model_to_json(model).dump());
}

inline PHNNModel load_model(const std::filesystem::path& path) { return model_from_json(detail::parse_document(path)); }

/// Loads a model and checks it has the expected state and control dimensions.
inline PHNNModel load_model(const std::filesystem::path& path, int expected_state_dim, int expected_control_dim) {
    PHNNModel model = load_model(path);
    if (model.state_dim() != expected_state_dim || model.control_dim() != expected_control_dim)
        throw DimensionError("layout mismatch: " + path.string() + " holds a model with (n, m) = (" +
                             std::to_string(model.state_dim()) + ", " + std::to_string(model.control_dim()) +
                             "), expected (" + std::to_string(expected_state_dim) + ", " +
                             std::to_string(expected_control_dim) + ")");
    return model;
}

// ---------------------------------------------------------------------------
// Coupling checkpoints
// ---------------------------------------------------------------------------

inline json coupling_to_json(const CouplingModel& c) {
    json j = {{"format_version", kFormatVersion}, {"layout", to_json(c.layout())}};
    if (c.is_constant()) {
        j["variant"] = "constant";
        json entries = json::array();
        const auto free = coupling_free_entries(c.layout());
        for (std::size_t k = 0; k < free.size(); ++k)
            entries.push_back({{"row", free[k].first},
                               {"col", free[k].second},
                               {"value", c.parameters().values()(static_cast<Eigen::Index>(k))}});
        j["free_entries"] = std::move(entries);
    } else {
        j["variant"] = "state_dependent";
        j["network"] = to_json(c.network_spec());
        j["parameters"] = detail::vec_to_json(c.parameters().values());
    }
    return j;
}

inline CouplingModel coupling_from_json(const json& j) {
    detail::check_version(j, "coupling");
    return detail::with_schema("coupling", [&] {
        SubsystemLayout layout = layout_from_json(j.at("layout"));
        const auto variant = j.at("variant").get<std::string>();
        if (variant == "constant") {
            const auto free = coupling_free_entries(layout);
            const auto& entries = j.at("free_entries");
            if (entries.size() != free.size())
                throw DimensionError("coupling: " + std::to_string(entries.size()) + " free entries, layout needs " +
                                     std::to_string(free.size()));
            Vec values(static_cast<Eigen::Index>(free.size()));
            for (std::size_t k = 0; k < free.size(); ++k) {
                const auto& e = entries[k];
                if (e.at("row").get<int>() != free[k].first || e.at("col").get<int>() != free[k].second)
                    throw DimensionError("coupling: free entry " + std::to_string(k) + " has unexpected position");
                values(static_cast<Eigen::Index>(k)) = e.at("value").get<double>();
            }
            return CouplingModel::from_free_entries(std::move(layout), values);
        }
        if (variant == "state_dependent")
            return CouplingModel::state_dependent(std::move(layout), mlp_spec_from_json(j.at("network")),
                                                  detail::vec_from_json(j.at("parameters")));
        throw FormatError("coupling: unknown variant '" + variant + "'");
    });
}

inline void save_coupling(const CouplingModel& c, const std::filesystem::path& path) {
    detail::write_atomically(path, coupling_to_json(c).dump());
}

inline CouplingModel load_coupling(const std::filesystem::path& path) {
    return coupling_from_json(detail::parse_document(path));
}

// ---------------------------------------------------------------------------
// Bound report
// ---------------------------------------------------------------------------

inline json bound_report_to_json(const BoundReport& r) {
    auto boxes = [](const std::vector<Vec>& v) {
        json arr = json::array();
        for (const auto& b : v) arr.push_back(detail::vec_to_json(b));
        return arr;
    };
    const auto k = r.gamma.rows();
    return {{"format_version", kFormatVersion},
            {"eps", r.eps},
            {"eta", r.eta},
            {"gamma", detail::mat_to_json(r.gamma)},
            {"sigma", detail::mat_to_json(r.sigma)},
            {"subsystems", k},
            {"lhs_max", r.lhs_max},
            {"lhs_argmax", r.lhs_argmax},
            {"rhs", r.rhs},
            {"rhs_pairwise", r.rhs_pairwise},
            {"holds", r.holds()},
            {"samples", r.samples},
            {"seed", r.seed},
            {"domain",
             {{"state_lower", boxes(r.domain.state_lower)},
              {"state_upper", boxes(r.domain.state_upper)},
              {"control_lower", boxes(r.domain.control_lower)},
              {"control_upper", boxes(r.domain.control_upper)}}}};
}

inline void save_bound_report(const BoundReport& r, const std::filesystem::path& path) {
    detail::write_atomically(path, bound_report_to_json(r).dump(2));
}

// ---------------------------------------------------------------------------
// CSV export
// ---------------------------------------------------------------------------

namespace detail {

inline void append_number(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

}  // namespace detail

/// Columns t, x_0..x_{n-1}, u_0..u_{m-1}; one row per sample.
inline std::string trajectory_csv(const Trajectory& tr) {
    const Eigen::Index n = tr.states.empty() ? 0 : tr.states[0].size();
    const Eigen::Index m = tr.controls.empty() ? 0 : tr.controls[0].size();
    std::string out = "t";
    for (Eigen::Index i = 0; i < n; ++i) out += ",x_" + std::to_string(i);
    for (Eigen::Index i = 0; i < m; ++i) out += ",u_" + std::to_string(i);
    out += '\n';
    for (std::size_t s = 0; s < tr.size(); ++s) {
        detail::append_number(out, tr.times[s]);
        for (Eigen::Index i = 0; i < n; ++i) {
            out += ',';
            detail::append_number(out, tr.states[s](i));
        }
        for (Eigen::Index i = 0; i < m; ++i) {
            out += ',';
            detail::append_number(out, tr.controls[s](i));
        }
        out += '\n';
    }
    return out;
}

inline std::string loss_history_csv(const std::vector<double>& history) {
    std::string out = "step,loss\n";
    for (std::size_t s = 0; s < history.size(); ++s) {
        out += std::to_string(s);
        out += ',';
        detail::append_number(out, history[s]);
        out += '\n';
    }
    return out;
}

inline void export_csv(const Trajectory& tr, const std::filesystem::path& path) {
    detail::write_atomically(path, trajectory_csv(tr));
}

inline void export_csv(const std::vector<double>& history, const std::filesystem::path& path) {
    detail::write_atomically(path, loss_history_csv(history));
}

}  // namespace phnn
