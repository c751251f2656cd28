#pragma once

#include "kinising/types.hpp"

#include <cstdint>
#include <vector>

namespace kinising {

struct GenConfig {
    int n_spins = 0;
    double t_end = 0.0;
    double g = 0.3;            // coupling std-dev scale: J_ij ~ N(0, g^2/N)
    double p_sparse = 0.0;     // probability a coupling is zeroed
    bool theta_gaussian = false;
    double theta_mean = 0.0;
    double theta_sd = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Event-driven Glauber sampler. Per attempted update the stream order
/// is fixed: (1) exponential waiting time with mean 1/(gamma*N),
/// (2) uniform spin index, (3) uniform accept coin against the flip
/// probability. Rejected attempts are not recorded; pass attempt_times
/// to observe every attempt (accepted or not) for diagnostics.
SpinTrajectory gillespie_sample(const IsingModel& model, const IVec& s0, double t_end,
                                std::uint64_t seed,
                                std::vector<double>* attempt_times = nullptr);

/// Random ground-truth couplings and fields. Draw order: J row-major
/// (one normal per entry, then one sparsity coin when p_sparse > 0),
/// then theta. gamma is supplied by the caller.
IsingModel generate_model(const GenConfig& cfg, double gamma);

/// Uniform +-1 initial configuration; one coin per spin.
IVec random_state(int n_spins, std::uint64_t seed);

}  // namespace kinising
