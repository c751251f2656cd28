#include "kinising/vb.hpp"

#include "assembly.hpp"
#include "kinising/likelihood.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

namespace kinising {

void PriorConfig::validate() const {
    if (!(lambda > 0.0)) throw std::invalid_argument("prior: lambda must be positive");
    if (!(lambda_theta > 0.0)) throw std::invalid_argument("prior: lambda_theta must be positive");
    if (!std::isfinite(mu_theta)) throw std::invalid_argument("prior: mu_theta must be finite");
}

RowPosteriorSet RowPosteriorSet::at_model(const IsingModel& model) {
    const int n = model.n_spins();
    RowPosteriorSet post;
    post.mu.resize(n);
    post.sigma.assign(n, Mat::Zero(n + 1, n + 1));
    for (int i = 0; i < n; ++i) {
        Vec mu(n + 1);
        mu[0] = model.theta[i];
        mu.tail(n) = model.J.row(i);
        post.mu[i] = mu;
    }
    return post;
}

namespace {

/// One Gaussian row update given assembled A_i, b_i and the diagonal
/// prior precision. Returns (mu, sigma).
std::pair<Vec, Mat> row_update(const Mat& a, const Vec& b, const Vec& prior_precision,
                               double prior_mean_theta, double jitter) {
    const int d = static_cast<int>(a.rows());
    Vec rhs = b;
    rhs[0] += prior_precision[0] * prior_mean_theta;

    Mat prec = a;
    prec.diagonal() += prior_precision;

    double jit = jitter;
    while (true) {
        Mat pj = prec;
        pj.diagonal().array() += jit;
        Eigen::LLT<Mat> llt(pj);
        if (llt.info() == Eigen::Success) {
            Mat sigma = llt.solve(Mat::Identity(d, d));
            sigma = 0.5 * (sigma + sigma.transpose());
            Vec mu = llt.solve(rhs);
            return {std::move(mu), std::move(sigma)};
        }
        jit = (jit == 0.0) ? 1e-12 : jit * 10.0;
        if (jit > 1e-4)
            throw std::runtime_error("vb row update: precision not positive definite");
    }
}

Vec prior_precision_row(const AugmentedMoments& moments, const PriorConfig& prior, int i, int n) {
    Vec p(n + 1);
    p[0] = prior.lambda_theta * prior.lambda_theta;
    for (int j = 0; j < n; ++j) p[j + 1] = prior.lambda * prior.lambda * moments.beta(i, j);
    return p;
}

}  // namespace

RowPosteriorSet vb_update_q1(const IntervalTable& table, const AugmentedMoments& moments,
                             const PriorConfig& prior, double jitter) {
    prior.validate();
    const int n = table.n_spins();
    if (moments.beta.rows() != n || moments.beta.cols() != n)
        throw std::invalid_argument("vb_update_q1: moments.beta missing or wrong shape");

    const LinearSystem sys = assemble_system(table, moments);
    RowPosteriorSet post;
    post.mu.resize(n);
    post.sigma.resize(n);
    for (int i = 0; i < n; ++i) {
        const Vec p = prior_precision_row(moments, prior, i, n);
        auto [mu, sigma] =
            row_update(sys.A[i], sys.b.row(i).transpose(), p, prior.mu_theta, jitter);
        post.mu[i] = std::move(mu);
        post.sigma[i] = std::move(sigma);
    }
    return post;
}

AugmentedMoments vb_update_q2(const IntervalTable& table, const RowPosteriorSet& post,
                              const PriorConfig& prior) {
    prior.validate();
    const int n = table.n_spins();
    AugmentedMoments m = compute_vb_moments(table, post);
    m.beta.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m.beta(i, j) =
                gig_beta_mean(std::sqrt(post.coupling_second_moment(i, j)), prior.lambda);
    return m;
}

namespace {

double posterior_entropy_neg(const RowPosteriorSet& post) {
    // <ln q1> = -1/2 sum_i ln det(2 pi e Sigma_i)
    double acc = 0.0;
    for (const Mat& s : post.sigma) {
        Eigen::LLT<Mat> llt(s);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("free_energy: posterior covariance not positive definite");
        const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        const double d = static_cast<double>(s.rows());
        acc -= 0.5 * (d * std::log(2.0 * M_PI * M_E) + log_det);
    }
    return acc;
}

}  // namespace

double free_energy_mismatched(const SpinTrajectory& traj, const RowPosteriorSet& q1,
                              const RowPosteriorSet& q1_for_q2, const PriorConfig& prior,
                              double gamma) {
    traj.validate();
    prior.validate();
    if (!(gamma > 0.0)) throw std::invalid_argument("free_energy: gamma must be positive");
    const int n = traj.n_spins;
    if (q1.n_spins() != n || q1_for_q2.n_spins() != n)
        throw std::invalid_argument("free_energy: posterior dimension mismatch");
    const bool same = (&q1 == &q1_for_q2);

    detail::VbWeightModel wq(traj, q1, gamma);
    detail::VbWeightModel ws_own(traj, q1_for_q2, gamma);
    detail::VbWeightModel& ws = same ? wq : ws_own;

    double f_data = 0.0;
    walk_intervals(
        traj,
        [&](std::size_t, double dur, const Vec& x) {
            for (int i = 0; i < n; ++i) {
                const double z = ws.root(i);
                const double s = x[i + 1];
                const double rho_hat =
                    dur * gamma * std::exp(s * ws.mean_h(i) - log_2cosh(z));
                f_data += dur * gamma - rho_hat;
                if (!same) {
                    f_data += rho_hat * s * (ws.mean_h(i) - wq.mean_h(i));
                    f_data += (2.0 * wq.second_moment_h(i) - 2.0 * z * z) * rho_hat *
                              pg_mean(1.0, 2.0 * z);
                }
            }
        },
        [&](std::size_t, int spin, const Vec& x) {
            const double z = ws.root(spin);
            f_data += log_2cosh(z) + x[spin + 1] * wq.mean_h(spin);
            if (!same)
                f_data += (2.0 * wq.second_moment_h(spin) - 2.0 * z * z) * pg_mean(1.0, 2.0 * z);
            wq.apply_flip(spin, x);
            if (!same) ws.apply_flip(spin, x);
        });

    // coupling-prior / sparsity-variable block
    double f_prior = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double j2_q1 = q1.coupling_second_moment(i, j);
            const double j2_src = q1_for_q2.coupling_second_moment(i, j);
            const double z =
                prior.lambda * std::max(std::sqrt(j2_src), kGigJFloor);
            f_prior += z - std::log(0.5 * prior.lambda) +
                       (prior.lambda * prior.lambda * j2_q1 - z * z) / (2.0 * z);
        }
    }

    // Gaussian field prior cross-entropy
    const double lt2 = prior.lambda_theta * prior.lambda_theta;
    for (int i = 0; i < n; ++i) {
        const double dm = q1.mu[i][0] - prior.mu_theta;
        f_prior += 0.5 * std::log(2.0 * M_PI) - std::log(prior.lambda_theta) +
                   0.5 * lt2 * (dm * dm + q1.sigma[i](0, 0));
    }

    const double f = f_data + f_prior + posterior_entropy_neg(q1);
    if (!std::isfinite(f)) throw std::runtime_error("free_energy: non-finite result");
    return f;
}

double free_energy(const SpinTrajectory& traj, const RowPosteriorSet& post,
                   const PriorConfig& prior, double gamma) {
    return free_energy_mismatched(traj, post, post, prior, gamma);
}

VbReport vb_fit(const SpinTrajectory& traj, double gamma, const PriorConfig& prior,
                const EmConfig& cfg) {
    traj.validate();
    prior.validate();
    cfg.validate();
    if (!(gamma > 0.0)) throw std::invalid_argument("vb_fit: gamma must be positive");
    const int n = traj.n_spins;

    // Initial posterior at the prior scale: zero coupling means, Laplace
    // variance 2/lambda^2 for couplings, 1/lambda_theta^2 for the field.
    RowPosteriorSet post;
    post.mu.resize(n);
    post.sigma.resize(n);
    {
        Vec mu0 = Vec::Zero(n + 1);
        mu0[0] = prior.mu_theta;
        Vec var = Vec::Constant(n + 1, 2.0 / (prior.lambda * prior.lambda));
        var[0] = 1.0 / (prior.lambda_theta * prior.lambda_theta);
        for (int i = 0; i < n; ++i) {
            post.mu[i] = mu0;
            post.sigma[i] = var.asDiagonal();
        }
    }

    VbReport rep;
    double f = free_energy(traj, post, prior, gamma);
    rep.free_energy_trace.push_back(f);

    Vec beta_row(n);
    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        detail::VbWeightModel weights(traj, post, gamma);
        LinearSystem sys = detail::assemble_streaming(traj, weights);

        RowPosteriorSet next;
        next.mu.resize(n);
        next.sigma.resize(n);
        for (int i = 0; i < n; ++i) {
            Vec p(n + 1);
            p[0] = prior.lambda_theta * prior.lambda_theta;
            for (int j = 0; j < n; ++j)
                p[j + 1] = prior.lambda * prior.lambda *
                           gig_beta_mean(std::sqrt(post.coupling_second_moment(i, j)),
                                         prior.lambda);
            auto [mu, sigma] =
                row_update(sys.A[i], sys.b.row(i).transpose(), p, prior.mu_theta, cfg.jitter);
            next.mu[i] = std::move(mu);
            next.sigma[i] = std::move(sigma);
        }
        post = std::move(next);

        const double f_new = free_energy(traj, post, prior, gamma);
        rep.free_energy_trace.push_back(f_new);
        rep.iterations = iter;

        const double rel = std::abs(f_new - f) / std::max(std::abs(f_new), 1e-300);
        f = f_new;
        if (rel < cfg.tol) {
            rep.converged = true;
            break;
        }
    }
    rep.posterior = std::move(post);
    rep.free_energy = f;
    return rep;
}

}  // namespace kinising
