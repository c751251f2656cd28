#include <doctest.h>

#include "helpers.hpp"
#include "oracles.hpp"

#include "kinising/interval.hpp"
#include "kinising/likelihood.hpp"
#include "kinising/types.hpp"

#include <cmath>
#include <vector>

using namespace kinising;

TEST_SUITE("core-model") {

TEST_CASE("trajectory validation rejects malformed inputs") {
    SpinTrajectory t;
    t.n_spins = 2;
    t.t_end = 1.0;
    t.initial_state = IVec::Constant(2, 1);
    CHECK_NOTHROW(t.validate());

    SpinTrajectory bad = t;
    bad.initial_state[0] = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = t;
    bad.flips = {{0.5, 0}, {0.5, 1}};  // tie
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = t;
    bad.flips = {{0.4, 0}, {0.3, 1}};  // decreasing
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = t;
    bad.flips = {{1.5, 0}};  // past t_end
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = t;
    bad.flips = {{0.5, 2}};  // spin index out of range
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("model validation") {
    IsingModel m = testutil::random_model(3, 0.3, 100.0, 7);
    CHECK_NOTHROW(m.validate());
    m.gamma = 0.0;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    m.gamma = 100.0;
    m.J(1, 2) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}

TEST_CASE("interval table matches brute-force recomputation") {
    const IsingModel model = testutil::random_model(6, 0.4, 50.0, 11);
    const SpinTrajectory traj = testutil::sample(model, 3.0, 12);
    REQUIRE(traj.flips.size() > 20);

    const IntervalTable tab = build_interval_table(traj, model);
    CHECK(tab.n_intervals() == traj.flips.size() + 1);
    double total = 0.0;
    for (double d : tab.durations) {
        CHECK(d >= 0.0);
        total += d;
    }
    CHECK(total == doctest::Approx(traj.t_end).epsilon(1e-12));

    const Mat ref = oracle::brute_force_fields(traj, model);
    CHECK((tab.field - ref).cwiseAbs().maxCoeff() < 1e-10);

    for (Eigen::Index f = 0; f < tab.flip_spin.size(); ++f) {
        const int i = tab.flip_spin[f];
        CHECK(tab.flip_field[f] == doctest::Approx(tab.field(f, i)));
        CHECK(tab.flip_state[f] == tab.state(f, i));
    }
}

TEST_CASE("interval table commutes with a single-flip perturbation") {
    const IsingModel model = testutil::random_model(5, 0.4, 50.0, 21);
    SpinTrajectory traj = testutil::sample(model, 2.0, 22);
    REQUIRE(traj.flips.size() > 4);
    traj.flips[2].spin = (traj.flips[2].spin + 1) % traj.n_spins;
    const IntervalTable tab = build_interval_table(traj, model);
    const Mat ref = oracle::brute_force_fields(traj, model);
    CHECK((tab.field - ref).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("walk_intervals agrees with the materialized table") {
    const IsingModel model = testutil::random_model(4, 0.3, 80.0, 31);
    const SpinTrajectory traj = testutil::sample(model, 1.0, 32);
    const IntervalTable tab = build_interval_table(traj, model);

    std::size_t n_seen = 0;
    walk_intervals(
        traj,
        [&](std::size_t n, double dur, const Vec& x) {
            CHECK(dur == doctest::Approx(tab.durations[n]));
            CHECK((x - tab.augmented_state(n)).cwiseAbs().maxCoeff() == 0.0);
            ++n_seen;
        },
        [&](std::size_t f, int spin, const Vec& x) {
            CHECK(spin == tab.flip_spin[f]);
            CHECK(x[spin + 1] == static_cast<double>(tab.flip_state[f]));
        });
    CHECK(n_seen == tab.n_intervals());
}

TEST_CASE("stable primitives") {
    CHECK(log_2cosh(800.0) == doctest::Approx(800.0));
    CHECK(log_2cosh(0.0) == doctest::Approx(std::log(2.0)));
    CHECK(log_2cosh(-3.0) == doctest::Approx(std::log(2.0 * std::cosh(3.0))));
    CHECK(logistic(0.0) == doctest::Approx(0.5));
    CHECK(flip_probability(1, 0.7) == doctest::Approx(std::exp(-0.7) / (2 * std::cosh(0.7))));
    CHECK(flip_probability(-1, 0.7) + flip_probability(1, 0.7) ==
          doctest::Approx(1.0));  // opposite spins in the same field
}

TEST_CASE("free model log-likelihood closed form") {
    IsingModel m;
    const int n = 4;
    m.theta = Vec::Zero(n);
    m.J = Mat::Zero(n, n);
    m.gamma = 60.0;
    const SpinTrajectory traj = testutil::sample(m, 2.0, 41);
    const double expected = -static_cast<double>(traj.flips.size()) * std::log(2.0) -
                            n * m.gamma * traj.t_end / 2.0;
    CHECK(log_likelihood(traj, m) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("log-likelihood finite-difference gradient sanity") {
    const IsingModel model = testutil::random_model(3, 0.5, 40.0, 51);
    const SpinTrajectory traj = testutil::sample(model, 1.5, 52);
    const IsingModel other = testutil::random_model(3, 0.5, 40.0, 53);
    // directional derivative along (other - model) by two step sizes:
    // halving h divides the central-difference error by ~4
    auto dir_err = [&](double h) {
        IsingModel up = model, dn = model;
        up.theta += h * (other.theta - model.theta);
        up.J += h * (other.J - model.J);
        dn.theta -= h * (other.theta - model.theta);
        dn.J -= h * (other.J - model.J);
        return (log_likelihood(traj, up) - log_likelihood(traj, dn)) / (2.0 * h);
    };
    const double d1 = dir_err(1e-3);
    const double d2 = dir_err(5e-4);
    CHECK(std::abs(d1 - d2) < 1e-4 * std::max(1.0, std::abs(d1)));
}

TEST_CASE("discrete chain is normalized over all paths") {
    // per cell and spin the flip/no-flip probabilities sum to one, so
    // the path sum over a finite grid must be exactly one
    IsingModel m = testutil::random_model(2, 0.8, 30.0, 61);
    const double dt = 1e-3;
    const int cells = 2;

    double total = 0.0;
    for (int pattern = 0; pattern < (1 << (2 * cells)); ++pattern) {
        SpinTrajectory t;
        t.n_spins = 2;
        t.t_end = cells * dt;
        t.initial_state = IVec::Constant(2, 1);
        for (int c = 0; c < cells; ++c)
            for (int s = 0; s < 2; ++s)
                if (pattern & (1 << (2 * c + s)))
                    t.flips.push_back({(c + 0.3 + 0.2 * s) * dt, s});
        total += std::exp(discrete_log_prob(t, m, dt));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("discrete oracle refuses a double flip in one cell") {
    const IsingModel m = testutil::random_model(1, 0.0, 10.0, 1);
    SpinTrajectory t;
    t.n_spins = 1;
    t.t_end = 1.0;
    t.initial_state = IVec::Constant(1, 1);
    t.flips = {{0.51, 0}, {0.52, 0}};
    CHECK_THROWS_AS(discrete_log_prob(t, m, 0.1), std::invalid_argument);
}

TEST_CASE("discrete-to-continuous likelihood difference convergence") {
    const IsingModel model_a = testutil::random_model(3, 0.5, 20.0, 71);
    IsingModel model_b = testutil::random_model(3, 0.5, 20.0, 72);
    const SpinTrajectory traj = testutil::sample(model_a, 2.0, 73);

    const double d_cont = log_likelihood(traj, model_a) - log_likelihood(traj, model_b);
    std::vector<double> errs;
    for (double dt : {1e-3, 5e-4, 2.5e-4}) {
        const double d_disc =
            discrete_log_prob(traj, model_a, dt) - discrete_log_prob(traj, model_b, dt);
        errs.push_back(std::abs(d_disc - d_cont));
    }
    const double order1 = std::log2(errs[0] / errs[1]);
    const double order2 = std::log2(errs[1] / errs[2]);
    CHECK(0.5 * (order1 + order2) >= 0.9);
}

}  // TEST_SUITE
