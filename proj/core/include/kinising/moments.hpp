#pragma once

#include "kinising/interval.hpp"
#include "kinising/types.hpp"

namespace kinising {

struct RowPosteriorSet;  // vb.hpp

/// Below this |J| the GIG mean is capped: 1/(|J| lambda) diverges as
/// J -> 0, and the cap turns it into very strong finite shrinkage.
constexpr double kGigJFloor = 1e-8;

/// Mean of the tilted Polya-Gamma density PG(b, c): (b/(2c)) tanh(c/2).
/// Linear in b and even in c; series 1/4 - c^2/48 below |c| = 1e-4.
double pg_mean(double b, double c);

/// Mean latent Poisson count on an interval:
/// duration * gamma * exp(sH)/(2 cosh H).
double poisson_mean(double duration, double gamma, int s, double h);

/// Mean of GIG(J^2 lambda^2, 1, -1/2): 1/(|J| lambda), floored at
/// |J| = kGigJFloor.
double gig_beta_mean(double j, double lambda);

/// Conditional expectations of the augmenting variables; these are all
/// the E-step needs (the latent variables are never sampled).
struct AugmentedMoments {
    Vec flip_omega;     // <omega_i(t)> per flip
    Mat interval_rho;   // n_intervals x N
    Mat interval_omega; // n_intervals x N
    Mat beta;           // N x N, size 0 when absent (L1/VB only)
};

/// Moments conditioned on a point estimate (EM E-step):
/// flip omega = pg_mean(1, 2H), interval rho = poisson_mean(...),
/// interval omega = pg_mean(<rho>, 2H).
AugmentedMoments compute_em_moments(const IntervalTable& table, const IsingModel& model);

/// Moments under a Gaussian row posterior (variational step): H enters
/// through <H> = mu.x and <H^2> = (mu.x)^2 + x'Sigma x, with
/// x = (1, s_1, ..., s_N).
AugmentedMoments compute_vb_moments(const IntervalTable& table, const RowPosteriorSet& post);

}  // namespace kinising
