#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "phnn/model.hpp"
#include "phnn/ode.hpp"
#include "phnn/systems.hpp"
#include "test_support.hpp"

using namespace phnn;
using phnn::testing::random_model;
using phnn::testing::random_vec;
using phnn::testing::worst_relative_error;
using Catch::Approx;

namespace {

PHNNModel zero_model(int n, int m) {
    Rng rng(3);
    PHNNModel model = make_default_model(n, m, testing::random_skew(rng, n), {8, 8}, 1);
    model.set_parameters(Vec::Zero(static_cast<Eigen::Index>(model.parameters().size())));
    return model;
}

/// Exact oscillator flow x(t) = (cos t, −sin t) for m = k = 1.
Vec one_period_error(double dt) {
    const SMDParams p{1.0, 1.0, 0.0};
    const Vec x = ode_solve_rk4([&](const Vec& s) { return smd_rhs(p, s, Vec::Zero(1)); }, Vec{{1.0, 0.0}}, 0.0,
                                std::round(2.0 * std::numbers::pi / dt) * dt, SolverConfig{dt});
    const double T = std::round(2.0 * std::numbers::pi / dt) * dt;
    return x - Vec{{std::cos(T), -std::sin(T)}};
}

}  // namespace

TEST_CASE("hamiltonian and gradient", "[phnn][hamiltonian]") {
    SECTION("zero-parameter network is identically zero") {
        const auto model = zero_model(2, 1);
        Rng rng(1);
        for (int i = 0; i < 10; ++i) {
            const Vec x = random_vec(rng, 2, -5.0, 5.0);
            CHECK(model.hamiltonian(x) == 0.0);
            CHECK(model.hamiltonian_gradient(x).isZero(0.0));
        }
    }
    SECTION("oracle quadratic at (1, 1)") {
        const auto model = smd_oracle_model({1.0, 1.2, 1.7});
        CHECK(model.hamiltonian(Vec{{1.0, 1.0}}) == Approx(1.1).epsilon(1e-15));
        const Vec g = model.hamiltonian_gradient(Vec{{1.0, 1.0}});
        CHECK(g(0) == Approx(1.2).epsilon(1e-15));
        CHECK(g(1) == Approx(1.0).epsilon(1e-15));
    }
    SECTION("scalar output for small and large state dimensions") {
        for (int n : {2, 20}) {
            const auto model = make_default_model(n, 1, Mat::Zero(n, n), {8}, 4);
            const double h = model.hamiltonian(Vec::Ones(n));
            CHECK(std::isfinite(h));
            CHECK(model.hamiltonian_gradient(Vec::Ones(n)).size() == n);
        }
    }
    SECTION("gradient matches central differences on random states") {
        Rng rng(2);
        const auto model = random_model(rng, 3, 1);
        for (int i = 0; i < 100; ++i) {
            const Vec x = random_vec(rng, 3);
            const Vec g = model.hamiltonian_gradient(x);
            Vec fd(3);
            for (Eigen::Index k = 0; k < 3; ++k)
                fd(k) = testing::central_difference([&](const Vec& z) { return model.hamiltonian(z); }, x, k);
            CHECK(worst_relative_error(g, fd) < 1e-4);
        }
    }
    SECTION("dimension mismatch") {
        const auto model = zero_model(2, 1);
        CHECK_THROWS_AS(model.hamiltonian(Vec::Zero(3)), DimensionError);
        CHECK_THROWS_AS(model.hamiltonian_gradient(Vec::Zero(1)), DimensionError);
    }
}

TEST_CASE("dissipation matrix", "[phnn][dissipation]") {
    SECTION("zero raw entries give zero dissipation") {
        auto model = PHNNModel::create(2, 1, canonical_interconnection(), MlpHamiltonian{{2, {4}, 1}}, ConstantCholesky{},
                                       ConstantMatrix{}, 0);
        Vec p = model.parameters().values();
        p.segment(static_cast<Eigen::Index>(model.parameters().slice("dissipation").offset), 3).setZero();
        model.set_parameters(p);
        CHECK(model.dissipation_matrix(Vec{{0.4, 0.1}}).isZero(0.0));
    }
    SECTION("factor [[1,0],[2,3]] gives [[1,2],[2,13]]") {
        const Mat L = cholesky_factor_from_raw(Vec{{1.0, 2.0, std::sqrt(3.0)}}, 2);
        CHECK(L(0, 1) == 0.0);
        CHECK(L(1, 0) == 2.0);
        CHECK(L(1, 1) == Approx(3.0).epsilon(1e-15));
        const Mat R = L * L.transpose();
        CHECK(R(0, 0) == Approx(1.0));
        CHECK(R(0, 1) == Approx(2.0));
        CHECK(R(1, 0) == Approx(2.0));
        CHECK(R(1, 1) == Approx(13.0).epsilon(1e-15));
    }
    SECTION("negative raw diagonal still yields a non-negative factor diagonal") {
        const Mat L = cholesky_factor_from_raw(Vec{{-2.0, 0.5, -1.0}}, 2);
        CHECK(L(0, 0) == 4.0);
        CHECK(L(1, 1) == 1.0);
    }
    SECTION("PSD for random parametrizations and states") {
        Rng rng(3);
        for (int trial = 0; trial < 100; ++trial) {
            const auto model = random_model(rng, 1 + static_cast<int>(rng.uniform_index(4)), 1, 2.0);
            for (int s = 0; s < 10; ++s) {
                const Mat R = model.dissipation_matrix(random_vec(rng, model.state_dim(), -3.0, 3.0));
                CHECK((R - R.transpose()).cwiseAbs().maxCoeff() < 1e-14);
                CHECK(min_symmetric_eigenvalue(R) >= -1e-12);
            }
        }
    }
}

TEST_CASE("input matrix", "[phnn][input]") {
    SECTION("constant entries (0, 1) give [[0],[1]] at every state") {
        auto model = PHNNModel::create(2, 1, canonical_interconnection(), MlpHamiltonian{{2, {4}, 1}}, ConstantCholesky{},
                                       ConstantMatrix{}, 0);
        Vec p = model.parameters().values();
        const auto off = static_cast<Eigen::Index>(model.parameters().slice("input_map").offset);
        p(off) = 0.0;
        p(off + 1) = 1.0;
        model.set_parameters(p);
        for (const Vec& x : {Vec{{0.0, 0.0}}, Vec{{3.0, -1.0}}}) CHECK(model.input_matrix(x) == Mat{{0.0}, {1.0}});
    }
    SECTION("constant n x m layout is row-major") {
        auto model = PHNNModel::create(2, 2, canonical_interconnection(), MlpHamiltonian{{2, {4}, 1}}, ConstantCholesky{},
                                       ConstantMatrix{}, 0);
        Vec p = model.parameters().values();
        const auto off = static_cast<Eigen::Index>(model.parameters().slice("input_map").offset);
        p.segment(off, 4) << 1.0, 2.0, 3.0, 4.0;
        model.set_parameters(p);
        CHECK(model.input_matrix(Vec::Zero(2)) == Mat{{1.0, 2.0}, {3.0, 4.0}});
    }
    SECTION("zero parameters and zero networks give zero matrices") {
        auto model = PHNNModel::create(3, 2, Mat::Zero(3, 3), MlpHamiltonian{{3, {4}, 1}}, ConstantCholesky{},
                                       MlpMatrix{{3, {5}, 6}}, 9);
        model.set_parameters(Vec::Zero(static_cast<Eigen::Index>(model.parameters().size())));
        const Mat G = model.input_matrix(Vec{{1.0, -2.0, 0.5}});
        CHECK(G.rows() == 3);
        CHECK(G.cols() == 2);
        CHECK(G.isZero(0.0));
    }
}

TEST_CASE("rhs and output", "[phnn][rhs]") {
    const auto oracle = smd_oracle_model({1.0, 1.2, 1.7});
    SECTION("zero Hamiltonian and zero control give a zero field") {
        const auto model = zero_model(2, 1);
        CHECK(model.rhs(Vec{{0.7, -0.2}}, Vec::Zero(1)).isZero(0.0));
    }
    SECTION("oracle spring-mass-damper hand values") {
        const Vec a = oracle.rhs(Vec{{1.0, 0.0}}, Vec::Zero(1));
        CHECK(a(0) == 0.0);
        CHECK(a(1) == Approx(-1.2).epsilon(1e-15));
        const Vec b = oracle.rhs(Vec{{0.0, 1.0}}, Vec{{2.0}});
        CHECK(b(0) == Approx(1.0).epsilon(1e-15));
        CHECK(b(1) == Approx(0.3).epsilon(1e-14));
    }
    SECTION("oracle model and closed-form simulator agree bitwise") {
        Rng rng(4);
        const SMDParams p{1.0, 1.2, 1.7};
        for (int i = 0; i < 1000; ++i) {
            const Vec x = random_vec(rng, 2, -2.0, 2.0);
            const Vec u = random_vec(rng, 1);
            CHECK(oracle.rhs(x, u) == smd_rhs(p, x, u));
        }
    }
    SECTION("output") {
        CHECK(zero_model(2, 1).output(Vec{{1.0, 1.0}}).isZero(0.0));
        const Vec y = smd_oracle_model({1.0, 1.2, 0.0}).output(Vec{{1.0, 1.0}});
        CHECK(y.size() == 1);
        CHECK(y(0) == Approx(1.0));
        const auto wide = make_default_model(5, 3, Mat::Zero(5, 5), {4}, 2);
        CHECK(wide.output(Vec::Ones(5)).size() == 3);
    }
    SECTION("dimension mismatch") {
        CHECK_THROWS_AS(oracle.rhs(Vec::Zero(3), Vec::Zero(1)), DimensionError);
        CHECK_THROWS_AS(oracle.rhs(Vec::Zero(2), Vec::Zero(2)), DimensionError);
    }
}

TEST_CASE("model construction validates its terms", "[phnn][construction]") {
    Mat not_skew{{0.0, 1.0}, {1.0, 0.0}};
    CHECK_THROWS_AS(PHNNModel::create(2, 1, not_skew, MlpHamiltonian{{2, {4}, 1}}, ConstantCholesky{}, ConstantMatrix{}, 0),
                    ValidationError);
    CHECK_THROWS_AS(PHNNModel::create(2, 1, canonical_interconnection(), MlpHamiltonian{{3, {4}, 1}}, ConstantCholesky{},
                                      ConstantMatrix{}, 0),
                    DimensionError);
    CHECK_THROWS_AS(PHNNModel::create(2, 1, canonical_interconnection(), MlpHamiltonian{{2, {4}, 1}},
                                      MlpCholesky{{2, {4}, 4}}, ConstantMatrix{}, 0),
                    DimensionError);
    const auto model = make_default_model(2, 1, canonical_interconnection(), {4}, 0);
    CHECK_THROWS_AS(model.with_parameters(Vec::Zero(3)), DimensionError);
    CHECK((model.interconnection() + model.interconnection().transpose()).isZero(0.0));
}

TEST_CASE("power balance and cyclo-passivity", "[phnn][passivity]") {
    SECTION("zero control cannot increase energy") {
        Rng rng(5);
        for (int trial = 0; trial < 200; ++trial) {
            const auto model = random_model(rng, 2 + static_cast<int>(rng.uniform_index(3)), 1, 1.5);
            const auto pb = model.power_balance(random_vec(rng, model.state_dim(), -2.0, 2.0), Vec::Zero(1));
            CHECK(pb.dH_dt <= 1e-12);
            CHECK(pb.supplied == 0.0);
        }
    }
    SECTION("undamped oracle oscillator conserves energy") {
        const auto model = smd_oracle_model({1.0, 1.0, 0.0});
        Rng rng(6);
        for (int i = 0; i < 100; ++i) CHECK(std::abs(model.power_balance(random_vec(rng, 2), Vec::Zero(1)).dH_dt) <= 1e-12);
    }
    SECTION("random parameters, states and controls") {
        Rng rng(7);
        for (int i = 0; i < 1000; ++i) {
            const auto model = random_model(rng, 2, 1 + static_cast<int>(rng.uniform_index(2)), 1.5);
            const auto pb =
                model.power_balance(random_vec(rng, 2, -2.0, 2.0), random_vec(rng, model.control_dim(), -2.0, 2.0));
            CHECK(pb.dH_dt <= pb.supplied + 1e-10);
        }
    }
}

TEST_CASE("rhs_vjp matches finite differences", "[phnn][gradient]") {
    Rng rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_index(2));
        const int m = 1 + static_cast<int>(rng.uniform_index(2));
        const auto model = random_model(rng, n, m, 0.8);
        const Vec x = random_vec(rng, n);
        const Vec u = random_vec(rng, m);
        const Vec w = random_vec(rng, n);
        const FieldVjp v = model.rhs_vjp(x, u, w);

        Vec fdx(n);
        for (Eigen::Index i = 0; i < n; ++i)
            fdx(i) = testing::central_difference([&](const Vec& z) { return w.dot(model.rhs(z, u)); }, x, i);
        CHECK(worst_relative_error(v.state, fdx, 1e-6) < 1e-5);

        const Vec theta = model.parameters().values();
        for (int k = 0; k < 10; ++k) {
            const auto idx = static_cast<Eigen::Index>(rng.uniform_index(model.parameters().size()));
            const double fd = testing::central_difference(
                [&](const Vec& p) { return w.dot(model.with_parameters(p).rhs(x, u)); }, theta, idx);
            CHECK(relative_error(v.params(idx), fd, 1e-6) < 1e-5);
        }
    }
}

TEST_CASE("oracle model rhs_vjp matches finite differences in the state", "[phnn][gradient]") {
    const auto model = smd_oracle_model({1.3, 0.8, 1.7});
    Rng rng(9);
    for (int i = 0; i < 50; ++i) {
        const Vec x = random_vec(rng, 2), u = random_vec(rng, 1), w = random_vec(rng, 2);
        const FieldVjp v = model.rhs_vjp(x, u, w);
        Vec fd(2);
        for (Eigen::Index k = 0; k < 2; ++k)
            fd(k) = testing::central_difference([&](const Vec& z) { return w.dot(model.rhs(z, u)); }, x, k);
        CHECK(worst_relative_error(v.state, fd, 1e-6) < 1e-6);
        CHECK(v.params.size() == 0);
    }
}

TEST_CASE("rk4 integrator", "[ode]") {
    SECTION("zero-length horizon returns the initial state") {
        const Vec x0{{0.3, -0.7}};
        CHECK(ode_solve_rk4([](const Vec& x) { return Vec(-x); }, x0, 1.5, 1.5, SolverConfig{0.1}) == x0);
    }
    SECTION("one step of exponential decay") {
        const Vec x = ode_solve_rk4([](const Vec& s) { return Vec(-s); }, Vec{{1.0}}, 0.0, 0.1, SolverConfig{0.1});
        // 1 - h + h²/2 - h³/6 + h⁴/24 at h = 0.1
        const double expected = 1.0 - 0.1 + 0.01 / 2.0 - 0.001 / 6.0 + 0.0001 / 24.0;
        CHECK(std::abs(x(0) - expected) < 1e-15);
        CHECK(std::abs(x(0) - 0.9048375) < 1e-12);
    }
    SECTION("oscillator period error and fourth-order convergence") {
        const double e1 = one_period_error(0.01).norm();
        const double e2 = one_period_error(0.005).norm();
        CHECK(e1 < 1e-6);
        CHECK(e1 / e2 >= 12.0);
    }
    SECTION("step count must be integral and horizons ordered") {
        auto f = [](const Vec& s) { return Vec(-s); };
        CHECK_THROWS_AS(ode_solve_rk4(f, Vec{{1.0}}, 0.0, 0.015, SolverConfig{0.01}), ValidationError);
        CHECK_THROWS_AS(ode_solve_rk4(f, Vec{{1.0}}, 1.0, 0.0, SolverConfig{0.01}), ValidationError);
        CHECK_THROWS_AS(SolverConfig{0.0}.validate(), ValidationError);
        CHECK(integral_step_count(0.0, 0.03, 0.01) == 3);
    }
    SECTION("divergence guard") {
        auto blowup = [](const Vec& s) { return Vec(s.array().square()); };
        CHECK_THROWS_AS(ode_solve_rk4(blowup, Vec{{10.0}}, 0.0, 1.0, SolverConfig{0.01}), DivergenceError);
        CHECK_THROWS_AS(ode_solve_rk4(blowup, Vec{{std::nan("")}}, 0.0, 1.0, SolverConfig{0.01}), DivergenceError);
    }
    SECTION("path returns every step") {
        const auto path =
            ode_solve_rk4_path([](const Vec& s) { return Vec(-s); }, Vec{{1.0}}, 0.0, 0.5, SolverConfig{0.1});
        REQUIRE(path.size() == 6);
        CHECK(path.back() == ode_solve_rk4([](const Vec& s) { return Vec(-s); }, Vec{{1.0}}, 0.0, 0.5, SolverConfig{0.1}));
    }
}
