#pragma once

#include "kinising/types.hpp"

#include <cstdint>
#include <vector>

namespace kinising {

/// Conductance-based leaky integrate-and-fire network: an unrecorded
/// Poisson input population X drives recurrently connected excitatory
/// and inhibitory populations. Synapses are exponentially decaying
/// conductances with uniform per-synapse strengths and delays.
/// Units: volts in mV, conductances in nS, capacitance in nF, times in
/// seconds.
struct LifConfig {
    int n_x = 800;
    int n_e = 800;
    int n_i = 200;

    double c_m = 0.25;        // nF
    double g_leak = 16.7;     // nS
    double v_leak = -70.0;    // mV
    double v_threshold = -50.0;
    double v_reset = -60.0;
    double refractory_e = 2e-3;  // s
    double refractory_i = 1e-3;

    double input_rate = 10.0;  // Hz, X population
    double p_connect = 0.2;

    // mean synaptic conductances g^{target,source} in nS; each synapse
    // is drawn uniform with this mean and sd = 0.5 * mean
    double g_ee = 2.4;
    double g_ei = 40.0;
    double g_ie = 4.8;
    double g_ii = 40.0;
    double g_ex = 5.4;
    double g_ix = 5.4;

    double tau_e = 5e-3;       // s, excitatory conductance decay
    double tau_i = 10e-3;
    double v_rev_e = 0.0;      // mV
    double v_rev_i = -80.0;
    double delay_min = 0.5e-3; // s
    double delay_max = 1.5e-3;

    double dt_sim = 5e-5;      // s
    double t_end = 1.0;        // s
    std::uint64_t seed = 0;

    void validate() const;
};

struct SpikeRecord {
    struct Neuron {
        char pop;                   // 'E' or 'I'
        std::vector<double> times;  // increasing, gaps >= refractory
    };
    std::vector<Neuron> neurons;
    double t_end = 0.0;
};

/// Forward-Euler simulation; spikes of all E and I neurons are
/// recorded. Deterministic given cfg.seed. Throws on numerically
/// unstable integration (|V| > 1000 mV).
SpikeRecord lif_simulate(const LifConfig& cfg);

/// Directed synapse adjacency among the recorded E/I neurons (entry
/// (i,j) nonzero when a synapse j -> i exists), for scoring coupling
/// recovery against ground truth.
Eigen::MatrixXi lif_synapse_matrix(const LifConfig& cfg);

/// Keeps the n_e_keep excitatory and n_i_keep inhibitory neurons with
/// the highest firing rates and binarizes: s_i = +1 for active_window
/// seconds after each spike (overlapping windows merged), -1 otherwise.
/// Boundary-event time ties are jittered by +1e-9 s. selected, when
/// given, receives the record indices of the kept neurons in spin
/// order.
SpinTrajectory select_and_binarize(const SpikeRecord& rec, int n_e_keep, int n_i_keep,
                                   double active_window,
                                   std::vector<int>* selected = nullptr);

}  // namespace kinising
