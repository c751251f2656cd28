#include "kinising/types.hpp"

#include <cmath>
#include <stdexcept>

namespace kinising {

void SpinTrajectory::validate() const {
    if (n_spins < 1) throw std::invalid_argument("trajectory: n_spins must be >= 1");
    if (!(t_end > 0.0) || !std::isfinite(t_end))
        throw std::invalid_argument("trajectory: t_end must be positive and finite");
    if (initial_state.size() != n_spins)
        throw std::invalid_argument("trajectory: initial_state length != n_spins");
    for (int i = 0; i < n_spins; ++i) {
        if (initial_state[i] != 1 && initial_state[i] != -1)
            throw std::invalid_argument("trajectory: initial_state entries must be +-1");
    }
    double prev = 0.0;
    for (const auto& f : flips) {
        if (!(f.t > prev))
            throw std::invalid_argument("trajectory: flip times must be strictly increasing in (0, t_end)");
        if (!(f.t < t_end))
            throw std::invalid_argument("trajectory: flip time outside (0, t_end)");
        if (f.spin < 0 || f.spin >= n_spins)
            throw std::invalid_argument("trajectory: flip spin index out of range");
        prev = f.t;
    }
}

void IsingModel::validate() const {
    const int n = n_spins();
    if (n < 1) throw std::invalid_argument("model: empty theta");
    if (J.rows() != n || J.cols() != n)
        throw std::invalid_argument("model: J must be N x N with N = theta length");
    if (!J.allFinite() || !theta.allFinite())
        throw std::invalid_argument("model: non-finite entries");
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw std::invalid_argument("model: gamma must be positive and finite");
}

IsingModel IsingModel::zeros(int n, double gamma) {
    IsingModel m;
    m.J = Mat::Zero(n, n);
    m.theta = Vec::Zero(n);
    m.gamma = gamma;
    return m;
}

}  // namespace kinising
