#include "kinising/likelihood.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace kinising {

namespace {
constexpr std::size_t kFieldRefreshStride = 1u << 16;
}

double log_likelihood(const SpinTrajectory& traj, const IsingModel& model) {
    traj.validate();
    model.validate();
    if (model.n_spins() != traj.n_spins)
        throw std::invalid_argument("log_likelihood: model/trajectory dimension mismatch");

    const int n = traj.n_spins;
    const double gamma = model.gamma;
    const std::size_t n_flips = traj.flips.size();

    Vec s(n);
    for (int i = 0; i < n; ++i) s[i] = static_cast<double>(traj.initial_state[i]);
    Vec h = model.theta + model.J * s;

    double ll = 0.0;
    double t_prev = 0.0;
    for (std::size_t f = 0; f <= n_flips; ++f) {
        const double t_next = (f < n_flips) ? traj.flips[f].t : traj.t_end;
        const double dur = t_next - t_prev;
        double integrand = 0.0;  // sum_i exp(s_i h_i)/(2 cosh h_i) - 1
        for (int i = 0; i < n; ++i) integrand += logistic(2.0 * s[i] * h[i]) - 1.0;
        ll += gamma * dur * integrand;
        if (f < n_flips) {
            const int j = traj.flips[f].spin;
            ll += -s[j] * h[j] - log_2cosh(h[j]);
            h -= 2.0 * s[j] * model.J.col(j);
            s[j] = -s[j];
            if ((f + 1) % kFieldRefreshStride == 0) h = model.theta + model.J * s;
        }
        t_prev = t_next;
    }
    if (!std::isfinite(ll)) throw std::runtime_error("log_likelihood: non-finite result");
    return ll;
}

double discrete_log_prob(const SpinTrajectory& traj, const IsingModel& model, double dt) {
    traj.validate();
    model.validate();
    if (model.n_spins() != traj.n_spins)
        throw std::invalid_argument("discrete_log_prob: model/trajectory dimension mismatch");
    if (!(dt > 0.0)) throw std::invalid_argument("discrete_log_prob: dt must be positive");
    if (!(dt * model.gamma < 1.0))
        throw std::invalid_argument("discrete_log_prob: dt*gamma must be < 1");
    const auto n_cells_f = std::round(traj.t_end / dt);
    if (std::abs(n_cells_f * dt - traj.t_end) > 1e-9 * std::max(1.0, traj.t_end))
        throw std::invalid_argument("discrete_log_prob: dt must divide t_end");
    const std::size_t n_cells = static_cast<std::size_t>(n_cells_f);

    const int n = traj.n_spins;
    const double gdt = model.gamma * dt;
    const std::size_t n_flips = traj.flips.size();

    Vec s(n);
    for (int i = 0; i < n; ++i) s[i] = static_cast<double>(traj.initial_state[i]);
    Vec h = model.theta + model.J * s;

    auto cell_of = [&](double t) {
        auto c = static_cast<std::size_t>(t / dt);
        return c >= n_cells ? n_cells - 1 : c;
    };
    auto no_flip_term = [&](int i) { return std::log1p(-gdt * logistic(-2.0 * s[i] * h[i])); };

    double lp = 0.0;
    std::size_t fp = 0;
    std::size_t k = 0;
    std::vector<char> flipped(n);
    while (k < n_cells) {
        const std::size_t k_next = (fp < n_flips) ? cell_of(traj.flips[fp].t) : n_cells;
        if (k_next > k) {
            // flip-free cells share one configuration
            double per_cell = 0.0;
            for (int i = 0; i < n; ++i) per_cell += no_flip_term(i);
            lp += static_cast<double>(k_next - k) * per_cell;
            k = k_next;
            continue;
        }
        // cell k contains one or more flips; all factors use the cell-start state
        std::fill(flipped.begin(), flipped.end(), 0);
        std::size_t fq = fp;
        while (fq < n_flips && cell_of(traj.flips[fq].t) == k) {
            const int j = traj.flips[fq].spin;
            if (flipped[j])
                throw std::invalid_argument(
                    "discrete_log_prob: two flips of one spin in a single grid cell");
            flipped[j] = 1;
            ++fq;
        }
        for (int i = 0; i < n; ++i) {
            if (flipped[i])
                lp += std::log(gdt) - s[i] * h[i] - log_2cosh(h[i]);
            else
                lp += no_flip_term(i);
        }
        for (std::size_t f = fp; f < fq; ++f) {
            const int j = traj.flips[f].spin;
            h -= 2.0 * s[j] * model.J.col(j);
            s[j] = -s[j];
        }
        fp = fq;
        ++k;
    }
    return lp;
}

}  // namespace kinising
