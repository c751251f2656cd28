#pragma once

#include "kinising/interval.hpp"
#include "kinising/moments.hpp"
#include "kinising/types.hpp"

#include <optional>
#include <vector>

namespace kinising {

struct EmConfig {
    int max_iters = 100;
    double tol = 1e-8;        // relative objective change
    double lambda = 0.0;      // L1 scale, 0 = plain EM
    std::optional<IsingModel> init;  // default: J = 0, theta = 0
    double jitter = 1e-10;    // ridge added to the A diagonal

    void validate() const;
};

/// Per-spin normal equations A_i J_row = b_i over the augmented vector
/// x = (1, s_1, ..., s_N); slot 0 carries theta_i. A_i already contains
/// the factor 4 of the quadratic coefficient.
struct LinearSystem {
    std::vector<Mat> A;  // N matrices, (N+1) x (N+1), symmetric PSD
    Mat b;               // N x (N+1), row i = b_i

    int n_spins() const { return static_cast<int>(A.size()); }
};

struct FitReport {
    IsingModel model;
    std::vector<double> loglik_trace;     // Eq.-(4)-style exact log-likelihood
    std::vector<double> penalized_trace;  // loglik - lambda * sum |J|, equals loglik at lambda=0
    int iterations = 0;
    bool converged = false;
};

/// b_i = -sum_{flips of i} s_i x + sum_n <rho_i^n> s_i^n x^n,
/// A_i = 4 (sum_{flips of i} <omega> x x' + sum_n <omega_i^n> x^n x^n').
LinearSystem assemble_system(const IntervalTable& table, const AugmentedMoments& moments);

/// Solves (A_i + jitter I + diag(0, l1_diag)) J_row = b_i by Cholesky;
/// on factorization failure the jitter escalates by 10x up to 1e-4.
/// l1_diag, when present, holds lambda^2 <beta_ij> for the N coupling
/// slots (theta is never penalized).
Vec solve_row(const LinearSystem& system, int i, double jitter,
              const Vec* l1_diag = nullptr);

/// Plain or L1-regularized EM: alternate analytical E-step moments and
/// row-wise linear solves until the relative change of the (penalized)
/// log-likelihood drops below cfg.tol.
FitReport em_fit(const SpinTrajectory& traj, double gamma, const EmConfig& cfg);

}  // namespace kinising
