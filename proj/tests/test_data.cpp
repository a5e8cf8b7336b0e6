#include "catch_amalgamated.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "phnn/io.hpp"
#include "phnn/systems.hpp"
#include "phnn/training.hpp"
#include "test_support.hpp"

using namespace phnn;
using phnn::testing::random_model;
using phnn::testing::random_vec;
namespace fs = std::filesystem;

namespace {

/// Fresh directory under the system temp dir, removed on scope exit.
struct ScratchDir {
    fs::path path;
    explicit ScratchDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("phnn_test_data_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    fs::path operator/(const std::string& name) const { return path / name; }
};

Dataset small_dataset(std::uint64_t seed) {
    const SMDParams p = default_subsystem_2();
    const DatasetSpec spec{4, 30, 0.01, Vec::Constant(2, -1.0), Vec::Constant(2, 1.0),
                           {SinusoidForcing{0.5, 1.0, 0.25}}, seed};
    return generate_dataset([&](const Vec& x, const Vec& u) { return smd_rhs(p, x, u); }, spec, "smd k=1.5");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string line; std::getline(ss, line);) out.push_back(line);
    return out;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
    return out;
}

}  // namespace

TEST_CASE("dataset round trip", "[data][dataset]") {
    ScratchDir dir("dataset");
    const auto d = small_dataset(3);
    save_dataset(d, dir / "d.json");
    CHECK_FALSE(fs::exists(dir / "d.json.tmp"));
    const auto back = load_dataset(dir / "d.json");
    REQUIRE(back.trajectories.size() == d.trajectories.size());
    for (std::size_t k = 0; k < d.trajectories.size(); ++k) {
        CHECK(back.trajectories[k].times == d.trajectories[k].times);
        CHECK(back.trajectories[k].states == d.trajectories[k].states);
        CHECK(back.trajectories[k].controls == d.trajectories[k].controls);
    }
    CHECK(back.metadata.dt == d.metadata.dt);
    CHECK(back.metadata.system == d.metadata.system);
    CHECK(back.metadata.seed == d.metadata.seed);
    CHECK(back.metadata.forcing == d.metadata.forcing);
}

TEST_CASE("dataset loading validates", "[data][dataset]") {
    ScratchDir dir("dataset_bad");
    auto j = dataset_to_json(small_dataset(4));

    SECTION("decreasing times name the trajectory and index") {
        j["trajectories"][2]["t"][7] = 0.0;
        spit(dir / "bad.json", j.dump());
        try {
            load_dataset(dir / "bad.json");
            FAIL("expected a validation error");
        } catch (const ValidationError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("trajectory 2") != std::string::npos);
            CHECK(msg.find("index 7") != std::string::npos);
        }
    }
    SECTION("length mismatch") {
        j["trajectories"][0]["u"].erase(0);
        spit(dir / "bad.json", j.dump());
        CHECK_THROWS_AS(load_dataset(dir / "bad.json"), ValidationError);
    }
    SECTION("inconsistent state dimension") {
        j["trajectories"][1]["x"][3] = {1.0, 2.0, 3.0};
        spit(dir / "bad.json", j.dump());
        CHECK_THROWS_WITH(load_dataset(dir / "bad.json"), Catch::Matchers::ContainsSubstring("field x index 3"));
    }
    SECTION("empty trajectory list loads but cannot be trained on") {
        j["trajectories"] = json::array();
        spit(dir / "empty.json", j.dump());
        const auto empty = load_dataset(dir / "empty.json");
        CHECK(empty.trajectories.empty());
        const auto model = make_default_model(2, 1, canonical_interconnection(), {4}, 1);
        CHECK_THROWS_AS(train(model, empty, TrainConfig{1, 1, 1e-3, 0}, SolverConfig{0.01}), ValidationError);
    }
    SECTION("truncated file") {
        const std::string text = j.dump();
        spit(dir / "cut.json", text.substr(0, text.size() / 2));
        CHECK_THROWS_AS(load_dataset(dir / "cut.json"), FormatError);
    }
    SECTION("missing key") {
        j.erase("trajectories");
        spit(dir / "bad.json", j.dump());
        CHECK_THROWS_AS(load_dataset(dir / "bad.json"), FormatError);
    }
    SECTION("version mismatch") {
        j["format_version"] = 2;
        spit(dir / "v2.json", j.dump());
        CHECK_THROWS_WITH(load_dataset(dir / "v2.json"), Catch::Matchers::ContainsSubstring("format_version"));
    }
    SECTION("missing file") { CHECK_THROWS_AS(load_dataset(dir / "absent.json"), Error); }
    SECTION("save into a missing directory fails") {
        CHECK_THROWS_AS(save_dataset(small_dataset(1), dir / "no" / "such" / "d.json"), Error);
    }
}

TEST_CASE("model round trip predicts identically", "[data][model]") {
    ScratchDir dir("model");
    Rng rng(5);
    const SolverConfig cfg{0.01};
    for (int trial = 0; trial < 12; ++trial) {
        const auto model = random_model(rng, trial % 3 + 2, trial % 2 + 1, 0.8);
        save_model(model, dir / "m.json");
        const auto back = load_model(dir / "m.json");
        CHECK(back.parameters() == model.parameters());
        CHECK(back.interconnection() == model.interconnection());
        for (int s = 0; s < 5; ++s) {
            const Vec x = random_vec(rng, model.state_dim()), u = random_vec(rng, model.control_dim());
            CHECK(back.rhs(x, u) == model.rhs(x, u));
            CHECK(predict(back, x, u, 0.0, 0.05, cfg) == predict(model, x, u, 0.0, 0.05, cfg));
        }
    }
}

TEST_CASE("model checkpoint errors", "[data][model]") {
    ScratchDir dir("model_bad");
    const auto model = make_default_model(2, 1, canonical_interconnection(), {8, 8}, 3);
    save_model(model, dir / "m.json");

    CHECK_NOTHROW(load_model(dir / "m.json", 2, 1));
    CHECK_THROWS_WITH(load_model(dir / "m.json", 4, 2), Catch::Matchers::ContainsSubstring("layout mismatch"));

    const std::string text = slurp(dir / "m.json");
    spit(dir / "cut.json", text.substr(0, text.size() - 40));
    CHECK_THROWS_AS(load_model(dir / "cut.json"), FormatError);

    auto j = json::parse(text);
    j["format_version"] = 0;
    spit(dir / "v0.json", j.dump());
    CHECK_THROWS_AS(load_model(dir / "v0.json"), FormatError);

    j = json::parse(text);
    j["parameters"].erase(0);
    spit(dir / "short.json", j.dump());
    CHECK_THROWS_AS(load_model(dir / "short.json"), Error);

    j = json::parse(text);
    j["dissipation_spec"]["type"] = "banana";
    spit(dir / "type.json", j.dump());
    CHECK_THROWS_AS(load_model(dir / "type.json"), FormatError);

    CHECK_THROWS_AS(save_model(smd_oracle_model(default_subsystem_1()), dir / "o.json"), ValidationError);
}

TEST_CASE("coupling round trip", "[data][coupling]") {
    ScratchDir dir("coupling");
    const SubsystemLayout two({{2, 1}, {2, 1}});
    Rng rng(6);

    SECTION("constant") {
        const auto c = CouplingModel::from_free_entries(two, random_vec(rng, 4));
        save_coupling(c, dir / "c.json");
        const auto back = load_coupling(dir / "c.json");
        CHECK(back.is_constant());
        CHECK(back.constant_matrix() == c.constant_matrix());
        const auto j = json::parse(slurp(dir / "c.json"));
        CHECK(j.at("variant") == "constant");
        CHECK(j.at("free_entries").size() == 4);
        CHECK(j.at("free_entries")[1].at("row") == 0);
        CHECK(j.at("free_entries")[1].at("col") == 3);
    }
    SECTION("state dependent") {
        const auto c = CouplingModel::state_dependent(two, {6}, 9);
        save_coupling(c, dir / "c.json");
        const auto back = load_coupling(dir / "c.json");
        CHECK_FALSE(back.is_constant());
        for (int s = 0; s < 5; ++s) {
            const Vec x = random_vec(rng, 4);
            CHECK(back.matrix(x) == c.matrix(x));
        }
    }
    SECTION("tampered entry position") {
        auto j = coupling_to_json(chain_coupling(two));
        j["free_entries"][0]["col"] = 1;
        spit(dir / "bad.json", j.dump());
        CHECK_THROWS_AS(load_coupling(dir / "bad.json"), DimensionError);
    }
    SECTION("unknown variant") {
        auto j = coupling_to_json(chain_coupling(two));
        j["variant"] = "diagonal";
        spit(dir / "bad.json", j.dump());
        CHECK_THROWS_AS(load_coupling(dir / "bad.json"), FormatError);
    }
}

TEST_CASE("bound report export", "[data][bound]") {
    ScratchDir dir("bound");
    const SubsystemLayout two({{2, 1}, {2, 1}});
    const std::vector<PHNNModel> truth{smd_oracle_model(default_subsystem_1()), smd_oracle_model(default_subsystem_2())};
    const std::vector<PHNNModel> subs{testing::perturbed_oracle(default_subsystem_1(), Vec{{0.01, 0.02}}), truth[1]};
    const auto rep = error_bound_report(truth, subs, chain_coupling(two), chain_coupling(two),
                                        SamplingDomain::uniform(two, -1, 1, -0.5, 0.5), 50, 4);
    save_bound_report(rep, dir / "b.json");
    const auto j = json::parse(slurp(dir / "b.json"));
    CHECK(j.at("format_version") == 1);
    CHECK(j.at("lhs_max").get<double>() == rep.lhs_max);
    CHECK(j.at("rhs").get<double>() == rep.rhs);
    CHECK(j.at("samples") == 50);
    CHECK(j.at("seed") == 4);
    CHECK(j.at("holds") == true);
    CHECK(j.at("gamma").size() == 4);
    CHECK(j.at("domain").at("state_lower").size() == 2);
}

TEST_CASE("csv export", "[data][csv]") {
    ScratchDir dir("csv");
    const SMDParams p = default_subsystem_1();
    const auto tr = simulate_trajectory([&](const Vec& x, const Vec& u) { return smd_rhs(p, x, u); }, Vec{{0.3, -0.9}},
                                        {SinusoidForcing{0.5, 1.0, 0.0}}, 0.0, 500, 0.01);
    export_csv(tr, dir / "tr.csv");
    const auto lines = lines_of(slurp(dir / "tr.csv"));
    REQUIRE(lines.size() == 502);
    CHECK(lines[0] == "t,x_0,x_1,u_0");
    for (const auto& line : lines) CHECK(split(line).size() == 4);

    SECTION("values parse back exactly") {
        for (std::size_t s = 0; s < tr.size(); s += 37) {
            const auto cells = split(lines[s + 1]);
            CHECK(std::strtod(cells[0].c_str(), nullptr) == tr.times[s]);
            CHECK(std::strtod(cells[1].c_str(), nullptr) == tr.states[s](0));
            CHECK(std::strtod(cells[2].c_str(), nullptr) == tr.states[s](1));
            CHECK(std::strtod(cells[3].c_str(), nullptr) == tr.controls[s](0));
        }
    }
    SECTION("loss history") {
        export_csv(std::vector<double>{}, dir / "empty.csv");
        CHECK(slurp(dir / "empty.csv") == "step,loss\n");
        const std::vector<double> h{0.1, 1.0 / 3.0, 2.5e-300};
        export_csv(h, dir / "h.csv");
        const auto hl = lines_of(slurp(dir / "h.csv"));
        REQUIRE(hl.size() == 4);
        for (std::size_t s = 0; s < h.size(); ++s) {
            const auto cells = split(hl[s + 1]);
            CHECK(cells[0] == std::to_string(s));
            CHECK(std::strtod(cells[1].c_str(), nullptr) == h[s]);
        }
    }
}
