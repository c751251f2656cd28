#include "kinising/lif.hpp"

#include "kinising/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace kinising {

void LifConfig::validate() const {
    if (n_x < 0 || n_e < 1 || n_i < 0)
        throw std::invalid_argument("lif config: population counts invalid");
    if (!(t_end > 0.0) || !(dt_sim > 0.0))
        throw std::invalid_argument("lif config: t_end and dt_sim must be positive");
    if (!(v_reset < v_threshold))
        throw std::invalid_argument("lif config: v_reset must be below v_threshold");
    if (p_connect < 0.0 || p_connect > 1.0)
        throw std::invalid_argument("lif config: p_connect must be in [0,1]");
    for (double g : {g_leak, g_ee, g_ei, g_ie, g_ii, g_ex, g_ix})
        if (g < 0.0) throw std::invalid_argument("lif config: conductances must be >= 0");
    if (!(delay_min >= 0.0) || !(delay_max >= delay_min))
        throw std::invalid_argument("lif config: bad delay range");
    if (input_rate < 0.0) throw std::invalid_argument("lif config: input_rate must be >= 0");
}

namespace {

struct Synapse {
    int target;       // index into E+I array
    double g;         // nS
    int delay_steps;
    bool inhibitory;  // source population I
};

struct Network {
    // outgoing synapses per source: X sources first, then E, then I
    std::vector<std::vector<Synapse>> out;
};

// Uniform with mean g and sd 0.5 g: [g(1 - sqrt(3)/2), g(1 + sqrt(3)/2)].
double draw_strength(Rng& rng, double g_mean) {
    constexpr double half_width = 0.86602540378443864676;  // sqrt(3)/2
    return g_mean * (1.0 - half_width + 2.0 * half_width * rng.uniform());
}

/// Connectivity draw order (fixed): source groups X, E, I; within a
/// group source index ascending; targets E then I ascending. Per pair
/// one connect coin, then (if connected) one strength and one delay
/// draw.
Network build_network(const LifConfig& cfg, Rng& rng) {
    const int n_rec = cfg.n_e + cfg.n_i;
    Network net;
    net.out.resize(cfg.n_x + n_rec);

    auto g_mean_for = [&](bool target_is_e, int source_group) {
        // source_group: 0 = X, 1 = E, 2 = I
        if (source_group == 0) return target_is_e ? cfg.g_ex : cfg.g_ix;
        if (source_group == 1) return target_is_e ? cfg.g_ee : cfg.g_ie;
        return target_is_e ? cfg.g_ei : cfg.g_ii;
    };

    int source = 0;
    for (int group = 0; group < 3; ++group) {
        const int n_src = (group == 0) ? cfg.n_x : (group == 1) ? cfg.n_e : cfg.n_i;
        for (int k = 0; k < n_src; ++k, ++source) {
            for (int t = 0; t < n_rec; ++t) {
                if (rng.uniform() >= cfg.p_connect) continue;
                const bool target_is_e = t < cfg.n_e;
                Synapse syn;
                syn.target = t;
                syn.g = draw_strength(rng, g_mean_for(target_is_e, group));
                const double delay =
                    cfg.delay_min + rng.uniform() * (cfg.delay_max - cfg.delay_min);
                syn.delay_steps = std::max(1, static_cast<int>(std::lround(delay / cfg.dt_sim)));
                syn.inhibitory = (group == 2);
                net.out[source].push_back(syn);
            }
        }
    }
    return net;
}

}  // namespace

Eigen::MatrixXi lif_synapse_matrix(const LifConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const Network net = build_network(cfg, rng);
    const int n_rec = cfg.n_e + cfg.n_i;
    Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(n_rec, n_rec);
    for (int src = cfg.n_x; src < cfg.n_x + n_rec; ++src)
        for (const Synapse& syn : net.out[src]) adj(syn.target, src - cfg.n_x) = 1;
    return adj;
}

SpikeRecord lif_simulate(const LifConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const Network net = build_network(cfg, rng);

    const int n_rec = cfg.n_e + cfg.n_i;
    const double dt = cfg.dt_sim;
    const auto n_steps = static_cast<std::size_t>(std::llround(cfg.t_end / dt));

    // initial membrane potentials, uniform in [v_leak, v_threshold)
    Vec v(n_rec);
    for (int i = 0; i < n_rec; ++i)
        v[i] = cfg.v_leak + rng.uniform() * (cfg.v_threshold - cfg.v_leak);

    // X spike steps, one Poisson train per input neuron
    std::vector<std::pair<std::size_t, int>> x_spikes;  // (step, source id)
    for (int k = 0; k < cfg.n_x; ++k) {
        double t = 0.0;
        while (true) {
            t += rng.exponential(1.0 / std::max(cfg.input_rate, 1e-300));
            if (t >= cfg.t_end || cfg.input_rate <= 0.0) break;
            x_spikes.emplace_back(static_cast<std::size_t>(t / dt), k);
        }
    }
    std::sort(x_spikes.begin(), x_spikes.end());

    // delayed conductance deliveries in a ring of per-step buckets
    const int max_delay_steps =
        std::max(1, static_cast<int>(std::lround(cfg.delay_max / dt))) + 1;
    const int ring = max_delay_steps + 1;
    std::vector<Vec> inc_e(ring, Vec::Zero(n_rec));
    std::vector<Vec> inc_i(ring, Vec::Zero(n_rec));
    auto deliver = [&](int source, std::size_t step) {
        for (const Synapse& syn : net.out[source]) {
            const int slot = static_cast<int>((step + syn.delay_steps) % ring);
            if (syn.inhibitory)
                inc_i[slot][syn.target] += syn.g;
            else
                inc_e[slot][syn.target] += syn.g;
        }
    };

    Vec g_e = Vec::Zero(n_rec);
    Vec g_i = Vec::Zero(n_rec);
    const double decay_e = std::exp(-dt / cfg.tau_e);
    const double decay_i = std::exp(-dt / cfg.tau_i);
    Vec refractory_until = Vec::Constant(n_rec, -1.0);

    SpikeRecord rec;
    rec.t_end = cfg.t_end;
    rec.neurons.resize(n_rec);
    for (int i = 0; i < n_rec; ++i) rec.neurons[i].pop = i < cfg.n_e ? 'E' : 'I';

    std::size_t xp = 0;
    for (std::size_t step = 0; step < n_steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        while (xp < x_spikes.size() && x_spikes[xp].first == step)
            deliver(x_spikes[xp++].second, step);

        const int slot = static_cast<int>(step % ring);
        g_e += inc_e[slot];
        g_i += inc_i[slot];
        inc_e[slot].setZero();
        inc_i[slot].setZero();

        for (int i = 0; i < n_rec; ++i) {
            if (t < refractory_until[i]) {
                v[i] = cfg.v_reset;
                continue;
            }
            const double current = -cfg.g_leak * (v[i] - cfg.v_leak) -
                                   g_e[i] * (v[i] - cfg.v_rev_e) -
                                   g_i[i] * (v[i] - cfg.v_rev_i);
            v[i] += dt * current / cfg.c_m;
            if (v[i] >= cfg.v_threshold) {
                rec.neurons[i].times.push_back(t);
                v[i] = cfg.v_reset;
                refractory_until[i] =
                    t + (i < cfg.n_e ? cfg.refractory_e : cfg.refractory_i);
                deliver(cfg.n_x + i, step);
            }
        }
        g_e *= decay_e;
        g_i *= decay_i;

        if (step % 1000 == 0 && v.cwiseAbs().maxCoeff() > 1000.0)
            throw std::runtime_error(
                "lif_simulate: unstable integration, reduce dt_sim");
    }
    return rec;
}

SpinTrajectory select_and_binarize(const SpikeRecord& rec, int n_e_keep, int n_i_keep,
                                   double active_window, std::vector<int>* selected) {
    if (rec.neurons.empty()) throw std::invalid_argument("select_and_binarize: empty spike record");
    if (!(rec.t_end > 0.0)) throw std::invalid_argument("select_and_binarize: bad t_end");
    if (!(active_window > 0.0))
        throw std::invalid_argument("select_and_binarize: active_window must be positive");

    auto pick_top = [&](char pop, int want) {
        std::vector<int> idx;
        for (int i = 0; i < static_cast<int>(rec.neurons.size()); ++i)
            if (rec.neurons[i].pop == pop) idx.push_back(i);
        if (static_cast<int>(idx.size()) < want)
            throw std::invalid_argument("select_and_binarize: not enough recorded neurons");
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
            return rec.neurons[a].times.size() > rec.neurons[b].times.size();
        });
        idx.resize(want);
        return idx;
    };

    std::vector<int> keep = pick_top('E', n_e_keep);
    const std::vector<int> keep_i = pick_top('I', n_i_keep);
    keep.insert(keep.end(), keep_i.begin(), keep_i.end());
    if (selected) *selected = keep;

    const int n = static_cast<int>(keep.size());
    SpinTrajectory traj;
    traj.n_spins = n;
    traj.t_end = rec.t_end;
    traj.initial_state = IVec::Constant(n, -1);

    std::vector<FlipEvent> events;
    for (int s = 0; s < n; ++s) {
        const auto& times = rec.neurons[keep[s]].times;
        std::size_t k = 0;
        while (k < times.size()) {
            const double start = times[k];
            double end = start + active_window;
            while (k + 1 < times.size() && times[k + 1] < end) {
                ++k;
                end = times[k] + active_window;
            }
            ++k;
            if (start <= 0.0) {
                traj.initial_state[s] = 1;
            } else if (start < rec.t_end) {
                events.push_back({start, s});
            }
            if (end < rec.t_end) events.push_back({end, s});
        }
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const FlipEvent& a, const FlipEvent& b) { return a.t < b.t; });
    // jitter ties so flip times are strictly increasing
    for (std::size_t k = 1; k < events.size(); ++k)
        if (events[k].t <= events[k - 1].t) events[k].t = events[k - 1].t + 1e-9;
    while (!events.empty() && events.back().t >= rec.t_end) events.pop_back();
    traj.flips = std::move(events);
    traj.validate();
    return traj;
}

}  // namespace kinising
