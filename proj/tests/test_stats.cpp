#include <doctest.h>

#include "helpers.hpp"
#include "oracles.hpp"

#include "kinising/rng.hpp"
#include "kinising/stats.hpp"

#include <algorithm>
#include <cmath>

using namespace kinising;

TEST_SUITE("stats-eval") {

TEST_CASE("constant trajectory has unit means and zero covariance") {
    SpinTrajectory t;
    t.n_spins = 3;
    t.t_end = 2.0;
    t.initial_state = IVec::Constant(3, 1);
    const StatsReport rep = trajectory_stats(t, 2, 0, 0);
    CHECK((rep.m - Vec::Ones(3)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(rep.c2.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("binary identity C_ii = 1 - m_i^2 and symmetry") {
    const IsingModel model = testutil::random_model(5, 0.5, 50.0, 401);
    const SpinTrajectory traj = testutil::sample(model, 4.0, 402);
    const StatsReport rep = trajectory_stats(traj, 2, 0, 0);
    for (int i = 0; i < 5; ++i) {
        CHECK(std::abs(rep.m[i]) <= 1.0);
        CHECK(rep.c2(i, i) == doctest::Approx(1.0 - rep.m[i] * rep.m[i]).epsilon(1e-10));
    }
    CHECK((rep.c2 - rep.c2.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("exact second moments match a dense Riemann sum") {
    const IsingModel model = testutil::random_model(4, 0.6, 40.0, 411);
    const SpinTrajectory traj = testutil::sample(model, 2.0, 412);
    const StatsReport rep = trajectory_stats(traj, 2, 0, 0);
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j)
            CHECK(rep.c2(i, j) ==
                  doctest::Approx(oracle::riemann_c2(traj, i, j, 1e-4)).epsilon(1e-3));
}

TEST_CASE("stats commute with spin relabeling") {
    const IsingModel model = testutil::random_model(4, 0.5, 50.0, 421);
    const SpinTrajectory traj = testutil::sample(model, 3.0, 422);
    // reverse the labels
    SpinTrajectory rev = traj;
    for (int i = 0; i < 4; ++i) rev.initial_state[i] = traj.initial_state[3 - i];
    for (auto& f : rev.flips) f.spin = 3 - f.spin;
    const StatsReport a = trajectory_stats(traj, 2, 0, 0);
    const StatsReport b = trajectory_stats(rev, 2, 0, 0);
    for (int i = 0; i < 4; ++i) {
        CHECK(a.m[i] == doctest::Approx(b.m[3 - i]));
        for (int j = 0; j < 4; ++j) CHECK(a.c2(i, j) == doctest::Approx(b.c2(3 - i, 3 - j)));
    }
}

TEST_CASE("higher-order tuples are reproducible and strictly increasing") {
    const IsingModel model = testutil::random_model(6, 0.5, 40.0, 431);
    const SpinTrajectory traj = testutil::sample(model, 2.0, 432);
    const StatsReport a = trajectory_stats(traj, 4, 50, 99);
    const StatsReport b = trajectory_stats(traj, 4, 50, 99);
    REQUIRE(a.c3.size() == 50);
    REQUIRE(a.c4.size() == 50);
    for (std::size_t k = 0; k < a.c3.size(); ++k) {
        CHECK(a.c3[k].idx == b.c3[k].idx);
        CHECK(a.c3[k].value == b.c3[k].value);
        CHECK(a.c3[k].idx[0] < a.c3[k].idx[1]);
        CHECK(a.c3[k].idx[1] < a.c3[k].idx[2]);
        CHECK(a.c3[k].idx[3] == -1);
    }
    for (const auto& t : a.c4) {
        CHECK(t.idx[2] < t.idx[3]);
        CHECK(std::abs(t.value) <= 16.0);
    }
    const StatsReport c = trajectory_stats(traj, 4, 50, 100);
    bool differs = false;
    for (std::size_t k = 0; k < c.c3.size() && !differs; ++k)
        differs = c.c3[k].idx != a.c3[k].idx;
    CHECK(differs);
}

TEST_CASE("third-order moment value against direct evaluation") {
    const IsingModel model = testutil::random_model(4, 0.6, 40.0, 441);
    const SpinTrajectory traj = testutil::sample(model, 2.0, 442);
    const StatsReport rep = trajectory_stats(traj, 3, 10, 7);
    REQUIRE(!rep.c3.empty());
    const auto& tup = rep.c3.front();
    // dense grid evaluation of <(s_a - m_a)(s_b - m_b)(s_c - m_c)>
    const double dt = 1e-4;
    const auto steps = static_cast<std::size_t>(traj.t_end / dt);
    Vec s(4);
    for (int i = 0; i < 4; ++i) s[i] = traj.initial_state[i];
    std::size_t f = 0;
    double acc = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = (k + 0.5) * dt;
        while (f < traj.flips.size() && traj.flips[f].t <= t) s[traj.flips[f++].spin] *= -1.0;
        acc += (s[tup.idx[0]] - rep.m[tup.idx[0]]) * (s[tup.idx[1]] - rep.m[tup.idx[1]]) *
               (s[tup.idx[2]] - rep.m[tup.idx[2]]);
    }
    CHECK(tup.value == doctest::Approx(acc / steps).epsilon(2e-3));
}

TEST_CASE("mse basics and naive loop") {
    Mat a = Mat::Random(5, 5);
    CHECK(mse(a, a) == 0.0);
    Mat shifted = a.array() + 0.3;
    CHECK(mse(a, shifted) == doctest::Approx(0.09));
    Mat b = Mat::Random(5, 5);
    double acc = 0.0;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) acc += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
    CHECK(mse(a, b) == doctest::Approx(acc / 25.0));
    CHECK_THROWS_AS(mse(a, Mat::Zero(4, 4)), std::invalid_argument);
}

TEST_CASE("roc on perfectly separated scores") {
    const std::vector<char> truth = {1, 1, 1, 0, 0};
    const std::vector<double> scores = {0.9, 0.8, 0.7, 0.2, 0.1};
    const RocCurve roc = roc_auc(truth, scores);
    CHECK(roc.auc == doctest::Approx(1.0));
    CHECK(roc.fpr.front() == 0.0);
    CHECK(roc.tpr.front() == 0.0);
    CHECK(roc.fpr.back() == 1.0);
    CHECK(roc.tpr.back() == 1.0);
    for (std::size_t k = 1; k < roc.fpr.size(); ++k) {
        CHECK(roc.fpr[k] >= roc.fpr[k - 1]);
        CHECK(roc.tpr[k] >= roc.tpr[k - 1]);
        CHECK(roc.thresholds[k] < roc.thresholds[k - 1]);
    }
}

TEST_CASE("roc hand case") {
    const RocCurve roc = roc_auc({1, 1, 0, 0}, {0.9, 0.4, 0.6, 0.1});
    CHECK(roc.auc == doctest::Approx(0.75));
}

TEST_CASE("roc at chance level on independent scores") {
    Rng rng(55);
    std::vector<char> truth(10000);
    std::vector<double> scores(10000);
    for (int k = 0; k < 10000; ++k) {
        truth[k] = rng.uniform() < 0.3;
        scores[k] = rng.uniform();
    }
    const double auc = roc_auc(truth, scores).auc;
    CHECK(auc > 0.47);
    CHECK(auc < 0.53);
}

TEST_CASE("roc is invariant under monotone score transforms") {
    Rng rng(56);
    std::vector<char> truth(500);
    std::vector<double> scores(500);
    for (int k = 0; k < 500; ++k) {
        truth[k] = rng.uniform() < 0.4;
        scores[k] = rng.uniform() * (truth[k] ? 1.3 : 1.0);
    }
    const double base = roc_auc(truth, scores).auc;
    std::vector<double> warped = scores;
    for (double& s : warped) s = std::exp(3.0 * s) + 1.0;
    CHECK(roc_auc(truth, warped).auc == doctest::Approx(base));
}

TEST_CASE("auc equals the Mann-Whitney statistic") {
    Rng rng(57);
    std::vector<char> truth(300);
    std::vector<double> scores(300);
    for (int k = 0; k < 300; ++k) {
        truth[k] = rng.uniform() < 0.5;
        scores[k] = std::round(rng.uniform() * 20.0) / 20.0 + (truth[k] ? 0.1 : 0.0);
    }
    const double auc = roc_auc(truth, scores).auc;
    double wins = 0.0;
    std::size_t pairs = 0;
    for (int p = 0; p < 300; ++p)
        for (int q = 0; q < 300; ++q) {
            if (!truth[p] || truth[q]) continue;
            ++pairs;
            if (scores[p] > scores[q])
                wins += 1.0;
            else if (scores[p] == scores[q])
                wins += 0.5;
        }
    CHECK(auc == doctest::Approx(wins / static_cast<double>(pairs)).epsilon(1e-10));
}

TEST_CASE("roc rejects single-class truth") {
    CHECK_THROWS_AS(roc_auc({1, 1}, {0.1, 0.2}), std::invalid_argument);
    CHECK_THROWS_AS(roc_auc({0, 0}, {0.1, 0.2}), std::invalid_argument);
}

TEST_CASE("pearson basics and reference value") {
    Vec x(5), y(5);
    x << 0.1, 2.3, -1.7, 4.2, 0.9;
    y = 2.0 * x.array() + 1.0;
    CHECK(pearson(x, y) == doctest::Approx(1.0));
    y = -x;
    CHECK(pearson(x, y) == doctest::Approx(-1.0));
    y << 1.4, 0.2, -2.1, 3.3, 2.8;
    // reference computed with 40-digit arithmetic
    CHECK(pearson(x, y) == doctest::Approx(0.7250693942698832).epsilon(1e-12));
    CHECK_THROWS_AS(pearson(x, Vec::Zero(5)), std::invalid_argument);
    CHECK_THROWS_AS(pearson(Vec::Zero(1), Vec::Zero(1)), std::invalid_argument);
}

}  // TEST_SUITE
