#include <doctest.h>

#include "helpers.hpp"

#include "kinising/likelihood.hpp"
#include "kinising/sampler.hpp"

#include <cmath>
#include <vector>

using namespace kinising;

TEST_SUITE("sampler") {

TEST_CASE("identical seeds give bitwise-identical trajectories") {
    const IsingModel model = testutil::random_model(8, 0.3, 100.0, 3);
    const IVec s0 = random_state(8, 4);
    const SpinTrajectory a = gillespie_sample(model, s0, 5.0, 42);
    const SpinTrajectory b = gillespie_sample(model, s0, 5.0, 42);
    REQUIRE(a.flips.size() == b.flips.size());
    for (std::size_t k = 0; k < a.flips.size(); ++k) {
        CHECK(a.flips[k].t == b.flips[k].t);
        CHECK(a.flips[k].spin == b.flips[k].spin);
    }
    const SpinTrajectory c = gillespie_sample(model, s0, 5.0, 43);
    CHECK(a.flips.size() != c.flips.size());
}

TEST_CASE("free single spin flips at rate gamma/2") {
    IsingModel m;
    m.theta = Vec::Zero(1);
    m.J = Mat::Zero(1, 1);
    m.gamma = 100.0;
    const IVec s0 = IVec::Constant(1, 1);
    const double t_end = 100.0;
    const SpinTrajectory traj = gillespie_sample(m, s0, t_end, 5);
    const double rate = static_cast<double>(traj.flips.size()) / t_end;
    const double expect = m.gamma / 2.0;
    const double band = 4.0 * std::sqrt(m.gamma / (2.0 * t_end));
    CHECK(std::abs(rate - expect) < band);
}

TEST_CASE("attempt waiting times have mean 1/(gamma N)") {
    const IsingModel model = testutil::random_model(5, 0.3, 80.0, 6);
    const IVec s0 = random_state(5, 7);
    std::vector<double> attempts;
    gillespie_sample(model, s0, 20.0, 8, &attempts);
    REQUIRE(attempts.size() > 1000);
    double mean_gap = attempts.back() / static_cast<double>(attempts.size());
    const double expect = 1.0 / (model.gamma * 5);
    const double se = expect / std::sqrt(static_cast<double>(attempts.size()));
    CHECK(std::abs(mean_gap - expect) < 3.0 * se);
}

TEST_CASE("single-spin occupancy matches detailed balance") {
    IsingModel m;
    m.theta = Vec::Constant(1, 0.8);
    m.J = Mat::Zero(1, 1);
    m.gamma = 100.0;
    const double t_end = 200.0;  // gamma t = 2e4
    const SpinTrajectory traj = gillespie_sample(m, IVec::Constant(1, -1), t_end, 9);

    double up_time = 0.0;
    double t_prev = 0.0;
    int s = -1;
    for (const auto& f : traj.flips) {
        if (s > 0) up_time += f.t - t_prev;
        t_prev = f.t;
        s = -s;
    }
    if (s > 0) up_time += t_end - t_prev;

    const double p_up = std::exp(m.theta[0]) / (2.0 * std::cosh(m.theta[0]));
    // effective samples ~ number of flips
    const double se = 0.5 / std::sqrt(static_cast<double>(traj.flips.size()));
    CHECK(std::abs(up_time / t_end - p_up) < 3.0 * se);
}

TEST_CASE("spin flip rate in a frozen field matches flip_probability") {
    // two spins, only spin 0 free: J rows of spin 1 are zero and spin 1
    // never flips because its own field is huge
    IsingModel m;
    m.theta = Vec::Zero(2);
    m.theta[1] = 50.0;  // pins spin 1 at +1
    m.J = Mat::Zero(2, 2);
    m.J(0, 1) = 0.7;
    m.gamma = 100.0;
    IVec s0(2);
    s0 << 1, 1;
    const double t_end = 400.0;
    const SpinTrajectory traj = gillespie_sample(m, s0, t_end, 10);

    // spin 0 sits in frozen field 0.7; count its +1 -> -1 transitions
    // against its occupancy of +1
    double up_time = 0.0, t_prev = 0.0;
    int s = 1, down_flips = 0;
    for (const auto& f : traj.flips) {
        REQUIRE(f.spin == 0);
        if (s > 0) {
            up_time += f.t - t_prev;
            ++down_flips;
        }
        t_prev = f.t;
        s = -s;
    }
    if (s > 0) up_time += t_end - t_prev;
    const double rate = down_flips / up_time;
    const double expect = m.gamma * flip_probability(1, 0.7);
    CHECK(std::abs(rate - expect) < 4.0 * std::sqrt(expect / up_time));
}

TEST_CASE("generated couplings have variance g^2/N") {
    const int n = 40;
    double acc = 0.0;
    int count = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        GenConfig cfg;
        cfg.n_spins = n;
        cfg.t_end = 1.0;
        cfg.g = 0.3;
        cfg.seed = seed;
        const IsingModel m = generate_model(cfg, 100.0);
        acc += m.J.array().square().sum();
        count += n * n;
    }
    const double expect = 0.09 / n;
    CHECK(std::abs(acc / count - expect) < 0.2 * expect);
}

TEST_CASE("degenerate generator settings") {
    GenConfig cfg;
    cfg.n_spins = 6;
    cfg.t_end = 1.0;
    cfg.g = 0.0;
    cfg.seed = 3;
    CHECK(generate_model(cfg, 10.0).J.cwiseAbs().maxCoeff() == 0.0);
    cfg.g = 0.5;
    cfg.p_sparse = 1.0;
    CHECK(generate_model(cfg, 10.0).J.cwiseAbs().maxCoeff() == 0.0);
    cfg.p_sparse = 0.5;
    const IsingModel m = generate_model(cfg, 10.0);
    int zeros = 0;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) zeros += m.J(i, j) == 0.0;
    CHECK(zeros > 6);
    CHECK(zeros < 30);
}

TEST_CASE("sampled trajectories validate") {
    const IsingModel model = testutil::random_model(7, 0.5, 60.0, 77);
    const SpinTrajectory traj = testutil::sample(model, 3.0, 78);
    CHECK_NOTHROW(traj.validate());
    CHECK(traj.flips.size() > 100);
}

}  // TEST_SUITE
