#include "kinising/interval.hpp"

#include <stdexcept>

namespace kinising {

IntervalTable build_interval_table(const SpinTrajectory& traj, const IsingModel& model) {
    traj.validate();
    model.validate();
    if (model.n_spins() != traj.n_spins)
        throw std::invalid_argument("build_interval_table: model/trajectory dimension mismatch");

    const int n = traj.n_spins;
    const std::size_t n_int = traj.n_intervals();
    const std::size_t n_flips = traj.flips.size();

    IntervalTable tab;
    tab.gamma = model.gamma;
    tab.durations.resize(n_int);
    tab.state.resize(n_int, n);
    tab.field.resize(n_int, n);
    tab.flip_spin.resize(n_flips);
    tab.flip_field.resize(n_flips);
    tab.flip_state.resize(n_flips);

    Vec s(n);
    for (int i = 0; i < n; ++i) s[i] = static_cast<double>(traj.initial_state[i]);
    Vec h = model.theta + model.J * s;

    double t_prev = 0.0;
    for (std::size_t f = 0; f <= n_flips; ++f) {
        const double t_next = (f < n_flips) ? traj.flips[f].t : traj.t_end;
        tab.durations[f] = t_next - t_prev;
        for (int i = 0; i < n; ++i) {
            tab.state(f, i) = static_cast<signed char>(s[i]);
            tab.field(f, i) = h[i];
        }
        if (f < n_flips) {
            const int j = traj.flips[f].spin;
            tab.flip_spin[f] = j;
            tab.flip_state[f] = static_cast<signed char>(s[j]);
            tab.flip_field[f] = h[j];
            // flip of spin j shifts every field by -2 s_j J_ij
            h -= 2.0 * s[j] * model.J.col(j);
            s[j] = -s[j];
        }
        t_prev = t_next;
    }
    return tab;
}

}  // namespace kinising
