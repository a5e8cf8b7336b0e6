// phnn: command-line pipeline for training, composing and checking port-Hamiltonian networks.
//
//   phnn simulate         ground-truth composite trajectories (JSON + CSV)
//   phnn gen-data         per-subsystem train/test sets and composite transitions
//   phnn train            one PHNN per subsystem type
//   phnn learn-coupling   fit the composition matrix from composite transitions
//   phnn compose          assemble the composite model, export a rollout against ground truth
//   phnn evaluate         one-step test loss and rollout RMSE
//   phnn bound-report     sampled composition error bound
//   phnn passivity-check  dH/dt along unforced rollouts
//
// Exit codes: 0 success, 2 configuration error, 3 validation error, 4 numerical divergence.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "phnn/phnn.hpp"

namespace fs = std::filesystem;
using namespace phnn;

namespace {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct SubsystemType {
    std::string name;
    SMDParams params;
    ForcingSpec forcing;
    ForcingSpec test_forcing;
};

struct RunConfig {
    std::uint64_t seed = 0;
    fs::path out = "out";
    double dt = 0.01;
    std::vector<SubsystemType> types;

    // Composite: one type name per subsystem, one forcing channel per subsystem.
    std::vector<std::string> chain;
    ForcingSpec composite_forcing;
    std::string coupling_source = "learned";  // "learned" or "true"

    std::size_t train_trajectories = 100, test_trajectories = 20, n_steps = 500;
    double box_lo = -1.0, box_hi = 1.0;

    std::vector<int> hidden{32, 32};
    TrainConfig train{5000, 32, 1e-3, 0};

    std::string coupling_method = "lsq";  // "lsq" or "nn"
    std::size_t coupling_transitions = 4;
    TrainConfig coupling_train{2000, 4, 1e-3, 0};
    std::vector<int> coupling_hidden{32, 32};

    std::size_t simulate_trajectories = 3, simulate_steps = 500;
    std::size_t rollouts = 5;
    double rollout_duration = 10.0;

    std::size_t bound_samples = 1000;
    double control_lo = -1.0, control_hi = 1.0;

    std::size_t passivity_rollouts = 10, passivity_steps = 1000;
    double passivity_tolerance = 1e-10;

    const SubsystemType& type(const std::string& name) const {
        for (const auto& t : types)
            if (t.name == name) return t;
        throw ConfigError("unknown subsystem type '" + name + "'");
    }
    SubsystemLayout layout() const { return SubsystemLayout(std::vector<std::pair<int, int>>(chain.size(), {2, 1})); }
    std::vector<SMDParams> chain_params() const {
        std::vector<SMDParams> out;
        for (const auto& n : chain) out.push_back(type(n).params);
        return out;
    }
    fs::path dir(const std::string& sub) const { return out / sub; }
};

template <class T>
T value_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

RunConfig parse_config(const json& j) {
    RunConfig c;
    c.seed = value_or<std::uint64_t>(j, "seed", 0);
    c.out = value_or<std::string>(j, "out", "out");
    c.dt = value_or(j, "dt", 0.01);
    SolverConfig{c.dt}.validate();

    if (!j.contains("subsystems") || j.at("subsystems").empty()) throw ConfigError("config: 'subsystems' must list at least one type");
    for (const auto& s : j.at("subsystems")) {
        SubsystemType t;
        t.name = s.at("name").get<std::string>();
        t.params = {s.at("mass").get<double>(), s.at("spring_constant").get<double>(), s.at("damping").get<double>()};
        t.params.validate();
        t.forcing = forcing_from_json(s.at("forcing"));
        t.test_forcing = forcing_from_json(s.value("test_forcing", s.at("forcing")));
        if (t.forcing.size() != 1 || t.test_forcing.size() != 1)
            throw ConfigError("config: subsystem '" + t.name + "' needs exactly one forcing channel");
        c.types.push_back(std::move(t));
    }

    const json& comp = j.at("composite");
    c.chain = comp.at("chain").get<std::vector<std::string>>();
    for (const auto& n : c.chain) c.type(n);
    c.composite_forcing = forcing_from_json(comp.at("forcing"));
    if (c.composite_forcing.size() != c.chain.size())
        throw ConfigError("config: composite.forcing needs one channel per chain entry");
    c.coupling_source = value_or<std::string>(comp, "coupling", "learned");
    if (c.coupling_source != "learned" && c.coupling_source != "true")
        throw ConfigError("config: composite.coupling must be 'learned' or 'true'");

    if (j.contains("dataset")) {
        const json& d = j.at("dataset");
        c.train_trajectories = value_or(d, "train_trajectories", c.train_trajectories);
        c.test_trajectories = value_or(d, "test_trajectories", c.test_trajectories);
        c.n_steps = value_or(d, "n_steps", c.n_steps);
        c.box_lo = value_or(d, "initial_low", c.box_lo);
        c.box_hi = value_or(d, "initial_high", c.box_hi);
    }
    if (j.contains("model")) c.hidden = value_or(j.at("model"), "hidden", c.hidden);
    MlpSpec{2, c.hidden, 1, Activation::tanh}.validate();
    if (j.contains("train")) {
        const json& t = j.at("train");
        c.train.steps = value_or(t, "steps", c.train.steps);
        c.train.batch_size = value_or(t, "batch_size", c.train.batch_size);
        c.train.learning_rate = value_or(t, "learning_rate", c.train.learning_rate);
    }
    c.train.validate();
    if (j.contains("coupling_learning")) {
        const json& t = j.at("coupling_learning");
        c.coupling_method = value_or<std::string>(t, "method", c.coupling_method);
        c.coupling_transitions = value_or(t, "transitions", c.coupling_transitions);
        c.coupling_train.steps = value_or(t, "steps", c.coupling_train.steps);
        c.coupling_train.batch_size = value_or(t, "batch_size", c.coupling_train.batch_size);
        c.coupling_train.learning_rate = value_or(t, "learning_rate", c.coupling_train.learning_rate);
        c.coupling_hidden = value_or(t, "hidden", c.coupling_hidden);
    }
    if (c.coupling_method != "lsq" && c.coupling_method != "nn")
        throw ConfigError("config: coupling_learning.method must be 'lsq' or 'nn'");
    c.coupling_train.validate();
    if (j.contains("simulate")) {
        c.simulate_trajectories = value_or(j.at("simulate"), "n_trajectories", c.simulate_trajectories);
        c.simulate_steps = value_or(j.at("simulate"), "n_steps", c.simulate_steps);
    }
    if (j.contains("evaluate")) {
        c.rollouts = value_or(j.at("evaluate"), "rollouts", c.rollouts);
        c.rollout_duration = value_or(j.at("evaluate"), "duration", c.rollout_duration);
    }
    if (j.contains("bound")) {
        c.bound_samples = value_or(j.at("bound"), "samples", c.bound_samples);
        c.control_lo = value_or(j.at("bound"), "control_low", c.control_lo);
        c.control_hi = value_or(j.at("bound"), "control_high", c.control_hi);
    }
    if (j.contains("passivity")) {
        c.passivity_rollouts = value_or(j.at("passivity"), "rollouts", c.passivity_rollouts);
        c.passivity_steps = value_or(j.at("passivity"), "n_steps", c.passivity_steps);
        c.passivity_tolerance = value_or(j.at("passivity"), "tolerance", c.passivity_tolerance);
    }
    if (!(c.box_lo <= c.box_hi) || !(c.control_lo <= c.control_hi)) throw ConfigError("config: box lower bound exceeds upper");
    if (c.train_trajectories < 1 || c.test_trajectories < 1 || c.n_steps < 1 || c.simulate_trajectories < 1 ||
        c.simulate_steps < 1 || c.rollouts < 1 || c.bound_samples < 1 || c.passivity_rollouts < 1 ||
        c.coupling_transitions < 1)
        throw ConfigError("config: counts must be >= 1");
    integral_step_count(0.0, c.rollout_duration, c.dt);
    return c;
}

RunConfig load_config(const fs::path& path, std::optional<std::uint64_t> seed, std::optional<std::string> out) {
    if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
    try {
        RunConfig c = parse_config(json::parse(detail::read_file(path)));
        if (seed) c.seed = *seed;
        if (out) c.out = *out;
        return c;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

enum Stage : std::uint64_t { kSimulate = 1, kTrainData, kTestData, kInit, kBatches, kTransitions, kRollouts, kBound, kPassivity, kCoupling };

std::uint64_t seed_for(const RunConfig& c, Stage stage, std::uint64_t index = 0) {
    return derive_seed(derive_seed(c.seed, stage), index);
}

void ensure_dir(const fs::path& p) { fs::create_directories(p); }

fs::path model_path(const RunConfig& c, const std::string& type) { return c.dir("models") / (type + ".json"); }
fs::path coupling_path(const RunConfig& c) { return c.dir("models") / "coupling.json"; }
fs::path manifest_path(const RunConfig& c) { return c.dir("compose") / "composite.json"; }

void require_file(const fs::path& p) {
    if (!fs::exists(p)) throw Error("missing artifact " + p.string() + " (run the upstream command first)");
}

auto composite_truth(const RunConfig& c) {
    return [params = c.chain_params(), C = chain_coupling(c.layout())](const Vec& x, const Vec& u) {
        return composite_smd_rhs(params, C, x, u);
    };
}

Vec random_box(Rng& rng, Eigen::Index n, double lo, double hi) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
    return v;
}

double rmse(const Trajectory& a, const Trajectory& b) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t s = 0; s < a.size(); ++s) {
        sum += (a.states[s] - b.states[s]).squaredNorm();
        count += static_cast<std::size_t>(a.states[s].size());
    }
    return std::sqrt(sum / static_cast<double>(count));
}

void write_json(const fs::path& p, const json& j) { detail::write_atomically(p, j.dump(2)); }

/// The composite named by compose's manifest: trained submodels in chain order and the chosen coupling.
CompositeModel load_composite(const RunConfig& c) {
    require_file(manifest_path(c));
    const json m = detail::parse_document(manifest_path(c));
    detail::check_version(m, "composite manifest");
    std::vector<PHNNModel> subs;
    for (const auto& p : m.at("submodels")) subs.push_back(load_model(p.get<std::string>(), 2, 1));
    const auto coupling = m.at("coupling").get<std::string>() == "chain" ? chain_coupling(layout_of(subs))
                                                                          : load_coupling(m.at("coupling").get<std::string>());
    if (!(coupling.layout() == c.layout())) throw DimensionError("composite manifest does not match the configured chain");
    return CompositeModel(std::move(subs), coupling);
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_simulate(const RunConfig& c) {
    const auto dir = c.dir("simulate");
    ensure_dir(dir);
    const auto n = static_cast<Eigen::Index>(2 * c.chain.size());
    const DatasetSpec spec{c.simulate_trajectories, c.simulate_steps, c.dt, Vec::Constant(n, c.box_lo),
                           Vec::Constant(n, c.box_hi), c.composite_forcing, seed_for(c, kSimulate)};
    const auto d = generate_dataset(composite_truth(c), spec, "coupled spring-mass-dampers");
    save_dataset(d, dir / "composite.json");
    for (std::size_t k = 0; k < d.trajectories.size(); ++k)
        export_csv(d.trajectories[k], dir / ("composite_" + std::to_string(k) + ".csv"));
    std::printf("simulate: %zu trajectories x %zu samples -> %s\n", d.trajectories.size(), d.trajectories[0].size(),
                dir.string().c_str());
    return 0;
}

int cmd_gen_data(const RunConfig& c) {
    const auto dir = c.dir("data");
    ensure_dir(dir);
    for (std::size_t t = 0; t < c.types.size(); ++t) {
        const auto& ty = c.types[t];
        auto field = [&](const Vec& x, const Vec& u) { return smd_rhs(ty.params, x, u); };
        const DatasetSpec train{c.train_trajectories, c.n_steps, c.dt, Vec::Constant(2, c.box_lo), Vec::Constant(2, c.box_hi),
                                ty.forcing, seed_for(c, kTrainData, t)};
        DatasetSpec test = train;
        test.n_trajectories = c.test_trajectories;
        test.forcing = ty.test_forcing;
        test.seed = seed_for(c, kTestData, t);
        save_dataset(generate_dataset(field, train, ty.name), dir / (ty.name + "_train.json"));
        save_dataset(generate_dataset(field, test, ty.name), dir / (ty.name + "_test.json"));
        std::printf("gen-data: %s train %zu x %zu, test %zu x %zu\n", ty.name.c_str(), train.n_trajectories, c.n_steps,
                    test.n_trajectories, c.n_steps);
    }
    const auto n = static_cast<Eigen::Index>(2 * c.chain.size());
    const DatasetSpec comp{c.coupling_transitions, 1, c.dt, Vec::Constant(n, c.box_lo), Vec::Constant(n, c.box_hi),
                           c.composite_forcing, seed_for(c, kTransitions)};
    save_dataset(generate_dataset(composite_truth(c), comp, "coupled spring-mass-dampers"), dir / "composite_transitions.json");
    std::printf("gen-data: %zu composite transitions\n", c.coupling_transitions);
    return 0;
}

int cmd_train(const RunConfig& c) {
    ensure_dir(c.dir("models"));
    const SolverConfig solver{c.dt};
    for (std::size_t t = 0; t < c.types.size(); ++t) {
        const auto& ty = c.types[t];
        const auto train_path = c.dir("data") / (ty.name + "_train.json");
        const auto test_path = c.dir("data") / (ty.name + "_test.json");
        require_file(train_path);
        require_file(test_path);
        const auto train_data = load_dataset(train_path);
        const auto test_data = load_dataset(test_path);
        const auto init = make_default_model(2, 1, canonical_interconnection(), c.hidden, seed_for(c, kInit, t));
        TrainConfig tc = c.train;
        tc.seed = seed_for(c, kBatches, t);
        const double before = loss(init, test_data, solver);
        const auto res = train<PHNNModel>(init, train_data, tc, solver, [&](std::size_t step, const PHNNModel&) {
            if ((step + 1) % 1000 == 0) std::fprintf(stderr, "  %s step %zu\n", ty.name.c_str(), step + 1);
        });
        const double after = loss(res.model, test_data, solver);
        save_model(res.model, model_path(c, ty.name));
        export_csv(res.history, c.dir("models") / (ty.name + "_loss.csv"));
        std::printf("train: %s test loss %.6g -> %.6g (%.1fx)\n", ty.name.c_str(), before, after, before / after);
    }
    return 0;
}

std::vector<PHNNModel> load_chain_models(const RunConfig& c) {
    std::map<std::string, PHNNModel> cache;
    std::vector<PHNNModel> out;
    for (const auto& name : c.chain) {
        auto it = cache.find(name);
        if (it == cache.end()) {
            require_file(model_path(c, name));
            it = cache.emplace(name, load_model(model_path(c, name), 2, 1)).first;
        }
        out.push_back(it->second);
    }
    return out;
}

int cmd_learn_coupling(const RunConfig& c) {
    const auto data_path = c.dir("data") / "composite_transitions.json";
    require_file(data_path);
    const auto data = load_dataset(data_path);
    const auto subs = load_chain_models(c);
    if (c.coupling_method == "lsq") {
        const auto fit = learn_coupling_lsq(subs, c.layout(), data);
        save_coupling(fit.coupling, coupling_path(c));
        std::printf("learn-coupling: %lld free entries from %zu equations, residual %.3g, condition %.3g\n",
                    static_cast<long long>(fit.coupling.parameters().size()), fit.equations, fit.residual_norm,
                    fit.condition_number);
        const Vec& v = fit.coupling.parameters().values();
        if (v.size() <= 16) {
            std::printf("  entries:");
            for (Eigen::Index i = 0; i < v.size(); ++i) std::printf(" %.6g", v(i));
            std::printf("\n");
        }
    } else {
        TrainConfig tc = c.coupling_train;
        tc.seed = seed_for(c, kCoupling);
        const auto res = learn_coupling_nn(subs, c.layout(), data, tc, SolverConfig{c.dt}, c.coupling_hidden);
        save_coupling(res.coupling, coupling_path(c));
        export_csv(res.history, c.dir("models") / "coupling_loss.csv");
        std::printf("learn-coupling: state-dependent coupling, final batch loss %.6g\n",
                    res.history.empty() ? 0.0 : res.history.back());
    }
    return 0;
}

int cmd_compose(const RunConfig& c) {
    const auto dir = c.dir("compose");
    ensure_dir(dir);
    json subs = json::array();
    for (const auto& name : c.chain) {
        require_file(model_path(c, name));
        subs.push_back(fs::absolute(model_path(c, name)).string());
    }
    std::string coupling = "chain";
    if (c.coupling_source == "learned") {
        require_file(coupling_path(c));
        coupling = fs::absolute(coupling_path(c)).string();
    }
    write_json(manifest_path(c), {{"format_version", kFormatVersion}, {"chain", c.chain}, {"submodels", subs}, {"coupling", coupling}});

    const auto composite = load_composite(c);
    const auto steps = integral_step_count(0.0, c.rollout_duration, c.dt);
    Rng rng(seed_for(c, kRollouts));
    const Vec x0 = random_box(rng, composite.state_dim(), c.box_lo, c.box_hi);
    const auto truth = simulate_trajectory(composite_truth(c), x0, c.composite_forcing, 0.0, steps, c.dt);
    const auto model = simulate_trajectory([&](const Vec& x, const Vec& u) { return composite.rhs(x, u); }, x0,
                                           c.composite_forcing, 0.0, steps, c.dt);
    export_csv(truth, dir / "rollout_truth.csv");
    export_csv(model, dir / "rollout_model.csv");
    std::printf("compose: %zu subsystems, state dim %d, coupling %s; rollout RMSE %.6g\n", c.chain.size(),
                composite.state_dim(), c.coupling_source.c_str(), rmse(truth, model));
    return 0;
}

int cmd_evaluate(const RunConfig& c) {
    const SolverConfig solver{c.dt};
    json report = {{"format_version", kFormatVersion}, {"subsystems", json::array()}};
    for (const auto& ty : c.types) {
        const auto test_path = c.dir("data") / (ty.name + "_test.json");
        require_file(test_path);
        require_file(model_path(c, ty.name));
        const auto test = load_dataset(test_path);
        const auto model = load_model(model_path(c, ty.name), 2, 1);
        const double l = loss(model, test, solver);
        std::vector<double> errs;
        for (const auto& tr : test.trajectories) {
            const auto roll = simulate_trajectory([&](const Vec& x, const Vec& u) { return model.rhs(x, u); }, tr.states[0],
                                                  ty.test_forcing, tr.times[0], tr.size() - 1, c.dt);
            errs.push_back(rmse(tr, roll));
        }
        std::printf("evaluate: %s mean one-step test loss %.6g\n", ty.name.c_str(), l);
        for (std::size_t k = 0; k < errs.size(); ++k) std::printf("  trajectory %zu rollout RMSE %.6g\n", k, errs[k]);
        report["subsystems"].push_back({{"name", ty.name}, {"test_loss", l}, {"rollout_rmse", errs}});
    }

    const auto composite = load_composite(c);
    const auto steps = integral_step_count(0.0, c.rollout_duration, c.dt);
    std::vector<double> errs;
    for (std::size_t k = 0; k < c.rollouts; ++k) {
        Rng rng(seed_for(c, kRollouts, k));
        const Vec x0 = random_box(rng, composite.state_dim(), c.box_lo, c.box_hi);
        const auto truth = simulate_trajectory(composite_truth(c), x0, c.composite_forcing, 0.0, steps, c.dt);
        const auto model = simulate_trajectory([&](const Vec& x, const Vec& u) { return composite.rhs(x, u); }, x0,
                                               c.composite_forcing, 0.0, steps, c.dt);
        errs.push_back(rmse(truth, model));
        std::printf("evaluate: composite rollout %zu (%.3g s) RMSE %.6g\n", k, c.rollout_duration, errs.back());
    }
    report["composite"] = {{"duration", c.rollout_duration}, {"rollout_rmse", errs}};
    ensure_dir(c.dir("evaluate"));
    write_json(c.dir("evaluate") / "report.json", report);
    return 0;
}

int cmd_bound_report(const RunConfig& c) {
    const auto composite = load_composite(c);
    std::vector<PHNNModel> truth;
    for (const auto& p : c.chain_params()) truth.push_back(smd_oracle_model(p));
    const auto domain = SamplingDomain::uniform(c.layout(), c.box_lo, c.box_hi, c.control_lo, c.control_hi);
    const auto rep = error_bound_report(truth, composite.submodels(), chain_coupling(c.layout()), composite.coupling(), domain,
                                        c.bound_samples, seed_for(c, kBound));
    ensure_dir(c.dir("bound"));
    save_bound_report(rep, c.dir("bound") / "report.json");
    std::printf("bound-report: lhs_max %.6g <= rhs %.6g : %s (%zu samples)\n", rep.lhs_max, rep.rhs,
                rep.holds() ? "holds" : "VIOLATED", rep.samples);
    for (std::size_t i = 0; i < rep.eps.size(); ++i)
        std::printf("  subsystem %zu eps %.6g eta %.6g\n", i, rep.eps[i], rep.eta[i]);
    if (!rep.holds()) throw ValidationError("bound-report: sampled error exceeds the bound");
    return 0;
}

struct PassivityStats {
    double max_rate = -1e300;
    std::size_t violations = 0;
    std::size_t points = 0;
};

template <class M>
PassivityStats unforced_passivity(const M& model, const RunConfig& c, std::uint64_t seed) {
    PassivityStats s;
    const Vec u0 = Vec::Zero(model.control_dim());
    const ForcingSpec zero(static_cast<std::size_t>(model.control_dim()), ZeroForcing{});
    for (std::size_t k = 0; k < c.passivity_rollouts; ++k) {
        Rng rng(derive_seed(seed, k));
        const Vec x0 = random_box(rng, model.state_dim(), c.box_lo, c.box_hi);
        const auto tr = simulate_trajectory([&](const Vec& x, const Vec& u) { return model.rhs(x, u); }, x0, zero, 0.0,
                                            c.passivity_steps, c.dt);
        for (const auto& x : tr.states) {
            const auto pb = model.power_balance(x, u0);
            s.max_rate = std::max(s.max_rate, pb.dH_dt);
            if (pb.dH_dt > pb.supplied + c.passivity_tolerance) ++s.violations;
            ++s.points;
        }
    }
    return s;
}

int cmd_passivity_check(const RunConfig& c) {
    json report = {{"format_version", kFormatVersion}, {"tolerance", c.passivity_tolerance}, {"models", json::array()}};
    std::size_t total = 0;
    auto record = [&](const std::string& name, const PassivityStats& s) {
        std::printf("passivity-check: %s max dH/dt %.6g, %zu violations in %zu points\n", name.c_str(), s.max_rate,
                    s.violations, s.points);
        report["models"].push_back({{"name", name}, {"max_dH_dt", s.max_rate}, {"violations", s.violations}, {"points", s.points}});
        total += s.violations;
    };
    for (std::size_t t = 0; t < c.types.size(); ++t) {
        require_file(model_path(c, c.types[t].name));
        record(c.types[t].name, unforced_passivity(load_model(model_path(c, c.types[t].name), 2, 1), c, seed_for(c, kPassivity, t)));
    }
    if (fs::exists(manifest_path(c))) record("composite", unforced_passivity(load_composite(c), c, seed_for(c, kPassivity, 1000)));
    ensure_dir(c.dir("passivity"));
    write_json(c.dir("passivity") / "report.json", report);
    if (total > 0) throw ValidationError("passivity-check: " + std::to_string(total) + " violations");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Port-Hamiltonian neural network pipeline"};
    app.require_subcommand(1);
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;

    const std::vector<std::pair<std::string, std::function<int(const RunConfig&)>>> commands{
        {"simulate", cmd_simulate},
        {"gen-data", cmd_gen_data},
        {"train", cmd_train},
        {"learn-coupling", cmd_learn_coupling},
        {"compose", cmd_compose},
        {"evaluate", cmd_evaluate},
        {"bound-report", cmd_bound_report},
        {"passivity-check", cmd_passivity_check},
    };
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, fn] : commands) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "run configuration (JSON)")->required();
        sub->add_option("--seed", seed, "override the configured seed");
        sub->add_option("--out", out, "override the output directory");
        subs[name] = sub;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const RunConfig cfg = load_config(config_path, seed, out);
        for (const auto& [name, fn] : commands)
            if (subs[name]->parsed()) return fn(cfg);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << '\n';
        return 4;
    } catch (const RankDeficiencyError& e) {
        std::cerr << "error: " << e.what() << "\n  null space (" << e.null_space().cols() << " direction(s)):\n"
                  << e.null_space() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
