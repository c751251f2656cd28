#include "kinising/sampler.hpp"

#include "kinising/likelihood.hpp"
#include "kinising/rng.hpp"

#include <stdexcept>

namespace kinising {

void GenConfig::validate() const {
    if (n_spins < 1) throw std::invalid_argument("gen config: n_spins must be >= 1");
    if (!(t_end > 0.0)) throw std::invalid_argument("gen config: t_end must be positive");
    if (g < 0.0) throw std::invalid_argument("gen config: g must be >= 0");
    if (p_sparse < 0.0 || p_sparse > 1.0)
        throw std::invalid_argument("gen config: p_sparse must be in [0,1]");
}

SpinTrajectory gillespie_sample(const IsingModel& model, const IVec& s0, double t_end,
                                std::uint64_t seed, std::vector<double>* attempt_times) {
    model.validate();
    const int n = model.n_spins();
    if (s0.size() != n) throw std::invalid_argument("gillespie_sample: s0 length != N");
    if (!(t_end > 0.0)) throw std::invalid_argument("gillespie_sample: t_end must be positive");

    SpinTrajectory traj;
    traj.n_spins = n;
    traj.t_end = t_end;
    traj.initial_state = s0;

    Rng rng(seed);
    const double mean_wait = 1.0 / (model.gamma * static_cast<double>(n));

    Vec s(n);
    for (int i = 0; i < n; ++i) {
        if (s0[i] != 1 && s0[i] != -1)
            throw std::invalid_argument("gillespie_sample: s0 entries must be +-1");
        s[i] = static_cast<double>(s0[i]);
    }
    Vec h = model.theta + model.J * s;

    double t = 0.0;
    std::size_t accepted = 0;
    while (true) {
        t += rng.exponential(mean_wait);
        if (t >= t_end) break;
        if (attempt_times) attempt_times->push_back(t);
        const int i = rng.uniform_index(n);
        const double coin = rng.uniform();
        if (coin < flip_probability(static_cast<int>(s[i]), h[i])) {
            traj.flips.push_back({t, i});
            h -= 2.0 * s[i] * model.J.col(i);
            s[i] = -s[i];
            if (++accepted % (1u << 16) == 0) h = model.theta + model.J * s;
        }
    }
    return traj;
}

IsingModel generate_model(const GenConfig& cfg, double gamma) {
    cfg.validate();
    const int n = cfg.n_spins;
    Rng rng(cfg.seed);

    IsingModel m;
    m.J.resize(n, n);
    m.theta.resize(n);
    m.gamma = gamma;

    const double sd = cfg.g / std::sqrt(static_cast<double>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double v = sd * rng.normal();
            if (cfg.p_sparse > 0.0 && rng.uniform() < cfg.p_sparse) v = 0.0;
            m.J(i, j) = v;
        }
    }
    for (int i = 0; i < n; ++i) {
        m.theta[i] = cfg.theta_gaussian ? cfg.theta_mean + cfg.theta_sd * rng.normal() : 0.0;
    }
    return m;
}

IVec random_state(int n_spins, std::uint64_t seed) {
    Rng rng(seed);
    IVec s(n_spins);
    for (int i = 0; i < n_spins; ++i) s[i] = rng.uniform() < 0.5 ? -1 : 1;
    return s;
}

}  // namespace kinising
