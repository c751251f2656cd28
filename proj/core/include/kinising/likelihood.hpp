#pragma once

#include "kinising/types.hpp"

#include <cmath>

namespace kinising {

/// 1/(1+exp(-x)), stable for any finite x.
inline double logistic(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// ln(2 cosh x) = |x| + log1p(exp(-2|x|)), no overflow.
inline double log_2cosh(double x) {
    const double a = std::abs(x);
    return a + std::log1p(std::exp(-2.0 * a));
}

/// Probability that a selected spin s in field H flips:
/// exp(-sH)/(2 cosh H) = logistic(-2sH).
inline double flip_probability(int s, double h) {
    return logistic(-2.0 * static_cast<double>(s) * h);
}

/// Exact continuous-time log-likelihood of a trajectory: flip terms
/// -s_i(t)H_i(t) - ln(2cosh H_i(t)) plus the analytically integrated
/// survival term gamma * sum_i,n dt_n [exp(s H)/(2cosh H) - 1].
double log_likelihood(const SpinTrajectory& traj, const IsingModel& model);

/// Log-probability of the time-discretised chain on the grid
/// {0, dt, 2dt, ...}; flips are assigned to cell floor(t/dt) and
/// evaluated at the cell-start configuration. Test oracle only: two
/// flips of one spin inside a cell are refused, and the absolute value
/// differs from log_likelihood by a dt-dependent constant, so only
/// differences across models are comparable.
double discrete_log_prob(const SpinTrajectory& traj, const IsingModel& model, double dt);

}  // namespace kinising
