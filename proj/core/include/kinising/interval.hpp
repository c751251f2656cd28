#pragma once

#include "kinising/types.hpp"

namespace kinising {

/// Per-interval view of a trajectory under a model. Intervals are the
/// maximal stretches of constant configuration; interval n ends at the
/// n-th flip (the last one at t_end). Fields are updated incrementally:
/// a flip of spin j changes H_i by -2 s_j J_ij.
///
/// States and fields are materialized, so this is meant for data that
/// fits comfortably in memory; the fitters stream instead (see
/// walk_intervals) and never build this table on large inputs.
struct IntervalTable {
    double gamma = 0.0;                           // update rate of the owning model
    std::vector<double> durations;                // n_intervals, sum to t_end
    Eigen::Matrix<signed char, Eigen::Dynamic, Eigen::Dynamic> state;  // n_intervals x N
    Mat field;                                    // n_intervals x N, H_i^n
    IVec flip_spin;                               // per flip
    Vec flip_field;                               // pre-flip H_i(t)
    Eigen::Matrix<signed char, Eigen::Dynamic, 1> flip_state;  // pre-flip s_i(t)

    std::size_t n_intervals() const { return durations.size(); }
    int n_spins() const { return static_cast<int>(field.cols()); }

    /// Augmented state (1, s_1, ..., s_N) of interval n.
    Vec augmented_state(std::size_t n) const {
        Vec x(n_spins() + 1);
        x[0] = 1.0;
        for (int i = 0; i < n_spins(); ++i) x[i + 1] = static_cast<double>(state(n, i));
        return x;
    }
};

IntervalTable build_interval_table(const SpinTrajectory& traj, const IsingModel& model);

/// Streams the constant intervals of a trajectory without materializing
/// them. For n = 0..n_max calls on_interval(n, duration, x) where x is
/// the augmented state (1, s_1, ..., s_N); after every interval except
/// the last calls on_flip(flip_index, spin, x) with x still in the
/// pre-flip configuration, then applies the flip.
template <class FI, class FF>
void walk_intervals(const SpinTrajectory& traj, FI&& on_interval, FF&& on_flip) {
    const int n = traj.n_spins;
    Vec x(n + 1);
    x[0] = 1.0;
    for (int i = 0; i < n; ++i) x[i + 1] = static_cast<double>(traj.initial_state[i]);

    double t_prev = 0.0;
    const std::size_t n_flips = traj.flips.size();
    for (std::size_t f = 0; f <= n_flips; ++f) {
        const double t_next = (f < n_flips) ? traj.flips[f].t : traj.t_end;
        on_interval(f, t_next - t_prev, x);
        if (f < n_flips) {
            const int j = traj.flips[f].spin;
            on_flip(f, j, x);
            x[j + 1] = -x[j + 1];
        }
        t_prev = t_next;
    }
}

}  // namespace kinising
