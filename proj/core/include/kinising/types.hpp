#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace kinising {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IVec = Eigen::VectorXi;

constexpr const char* kVersion = "0.1.0";

struct FlipEvent {
    double t;
    int spin;
};

/// Piecewise-constant record of N spins on [0, t_end]: the initial
/// configuration plus an ordered list of single-spin flip events.
struct SpinTrajectory {
    int n_spins = 0;
    double t_end = 0.0;
    IVec initial_state;            // entries in {-1,+1}
    std::vector<FlipEvent> flips;  // strictly increasing t in (0, t_end)

    std::size_t n_intervals() const { return flips.size() + 1; }

    /// Throws std::invalid_argument on any violated invariant.
    void validate() const;
};

/// Couplings J (row i = incoming couplings of spin i), external fields
/// theta and the update rate gamma. No symmetry is assumed and the
/// diagonal is allowed.
struct IsingModel {
    Mat J;
    Vec theta;
    double gamma = 0.0;

    int n_spins() const { return static_cast<int>(theta.size()); }
    void validate() const;

    static IsingModel zeros(int n, double gamma);
};

}  // namespace kinising
