#pragma once

#include "kinising/em.hpp"
#include "kinising/interval.hpp"
#include "kinising/moments.hpp"
#include "kinising/types.hpp"

#include <vector>

namespace kinising {

struct PriorConfig {
    double lambda = 1.0;        // Laplace scale over couplings
    double mu_theta = 0.0;      // Gaussian prior mean for fields
    double lambda_theta = 1.0;  // prior precision-root for fields (precision lambda_theta^2)

    void validate() const;
};

/// Factorized Gaussian posterior over the stacked rows
/// (theta_i, J_i1, ..., J_iN).
struct RowPosteriorSet {
    std::vector<Vec> mu;     // N vectors of length N+1
    std::vector<Mat> sigma;  // N matrices, (N+1) x (N+1), SPD

    int n_spins() const { return static_cast<int>(mu.size()); }

    /// <J_ij^2> = mu_ij^2 + (Sigma_i)_jj for coupling slot j (1-based
    /// augmented index j+1).
    double coupling_second_moment(int i, int j) const {
        const double m = mu[i][j + 1];
        return m * m + sigma[i](j + 1, j + 1);
    }

    /// Delta posterior at a point model (zero covariance).
    static RowPosteriorSet at_model(const IsingModel& model);
};

struct VbReport {
    RowPosteriorSet posterior;
    std::vector<double> free_energy_trace;
    double free_energy = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Gaussian row update: Sigma_i = (A_i + P_i)^-1 and
/// mu_i = Sigma_i (b_i + P_i mu_prior), where P_i is the diagonal prior
/// precision (lambda_theta^2, lambda^2 <beta_i1>, ..., lambda^2 <beta_iN>).
/// A_i is the assemble_system output, which already carries the factor 4.
/// moments.beta must be present.
RowPosteriorSet vb_update_q1(const IntervalTable& table, const AugmentedMoments& moments,
                             const PriorConfig& prior, double jitter = 1e-10);

/// Variational moments given the current posterior, including
/// <beta_ij> = gig_beta_mean(sqrt(<J_ij^2>), lambda).
AugmentedMoments vb_update_q2(const IntervalTable& table, const RowPosteriorSet& post,
                              const PriorConfig& prior);

/// Variational free energy with the latent factor q2 optimal for the
/// given posterior (the closed-form four-term sum). -F lower-bounds the
/// log marginal likelihood.
double free_energy(const SpinTrajectory& traj, const RowPosteriorSet& post,
                   const PriorConfig& prior, double gamma);

/// Free energy of the pair (q1, q2*(q1_for_q2)): q2 is the optimal
/// latent factor for q1_for_q2 while expectations over J use q1. With
/// q1_for_q2 == q1 this reduces to free_energy. Used to check descent
/// across individual half-steps.
double free_energy_mismatched(const SpinTrajectory& traj, const RowPosteriorSet& q1,
                              const RowPosteriorSet& q1_for_q2, const PriorConfig& prior,
                              double gamma);

/// Coordinate descent on the free energy: alternate the latent update
/// (implicit, through the moments) and the Gaussian row update until
/// the relative change of F drops below cfg.tol. cfg.lambda is ignored;
/// the prior carries the scale.
VbReport vb_fit(const SpinTrajectory& traj, double gamma, const PriorConfig& prior,
                const EmConfig& cfg);

}  // namespace kinising
