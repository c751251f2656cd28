#pragma once

#include "kinising/sampler.hpp"
#include "kinising/types.hpp"

#include <cstdint>

namespace testutil {

inline kinising::IsingModel random_model(int n, double g, double gamma, std::uint64_t seed,
                                         double p_sparse = 0.0, bool with_theta = true) {
    kinising::GenConfig cfg;
    cfg.n_spins = n;
    cfg.t_end = 1.0;  // unused by generate_model
    cfg.g = g;
    cfg.p_sparse = p_sparse;
    cfg.theta_gaussian = with_theta;
    cfg.theta_mean = 0.0;
    cfg.theta_sd = with_theta ? 0.3 : 0.0;
    cfg.seed = seed;
    return kinising::generate_model(cfg, gamma);
}

inline kinising::SpinTrajectory sample(const kinising::IsingModel& model, double t_end,
                                       std::uint64_t seed) {
    const kinising::IVec s0 = kinising::random_state(model.n_spins(), seed + 1000);
    return kinising::gillespie_sample(model, s0, t_end, seed);
}

}  // namespace testutil
