#include "kinising/moments.hpp"

#include "kinising/likelihood.hpp"
#include "kinising/vb.hpp"

#include <cmath>
#include <stdexcept>

namespace kinising {

double pg_mean(double b, double c) {
    if (b < 0.0) throw std::invalid_argument("pg_mean: b must be >= 0");
    const double a = std::abs(c);
    if (a < 1e-4) return b * (0.25 - c * c / 48.0);
    return b / (2.0 * c) * std::tanh(0.5 * c);
}

double poisson_mean(double duration, double gamma, int s, double h) {
    if (duration < 0.0) throw std::invalid_argument("poisson_mean: negative duration");
    if (!(gamma > 0.0)) throw std::invalid_argument("poisson_mean: gamma must be positive");
    return duration * gamma * logistic(2.0 * static_cast<double>(s) * h);
}

double gig_beta_mean(double j, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("gig_beta_mean: lambda must be positive");
    return 1.0 / (lambda * std::max(std::abs(j), kGigJFloor));
}

AugmentedMoments compute_em_moments(const IntervalTable& table, const IsingModel& model) {
    const int n = table.n_spins();
    if (model.n_spins() != n)
        throw std::invalid_argument("compute_em_moments: dimension mismatch");
    const std::size_t n_int = table.n_intervals();
    const std::size_t n_flips = table.flip_spin.size();

    AugmentedMoments m;
    m.flip_omega.resize(n_flips);
    m.interval_rho.resize(n_int, n);
    m.interval_omega.resize(n_int, n);

    for (std::size_t f = 0; f < n_flips; ++f)
        m.flip_omega[f] = pg_mean(1.0, 2.0 * table.flip_field[f]);

    for (std::size_t k = 0; k < n_int; ++k) {
        const double dur = table.durations[k];
        for (int i = 0; i < n; ++i) {
            const double h = table.field(k, i);
            const double rho = poisson_mean(dur, model.gamma, table.state(k, i), h);
            m.interval_rho(k, i) = rho;
            m.interval_omega(k, i) = pg_mean(rho, 2.0 * h);
        }
    }
    return m;
}

AugmentedMoments compute_vb_moments(const IntervalTable& table, const RowPosteriorSet& post) {
    const int n = table.n_spins();
    if (post.n_spins() != n)
        throw std::invalid_argument("compute_vb_moments: dimension mismatch");
    const std::size_t n_int = table.n_intervals();
    const std::size_t n_flips = table.flip_spin.size();

    // X holds the augmented state of every interval
    Mat X(n_int, n + 1);
    for (std::size_t k = 0; k < n_int; ++k) {
        X(k, 0) = 1.0;
        for (int i = 0; i < n; ++i) X(k, i + 1) = static_cast<double>(table.state(k, i));
    }

    AugmentedMoments m;
    m.flip_omega.resize(n_flips);
    m.interval_rho.resize(n_int, n);
    m.interval_omega.resize(n_int, n);

    for (int i = 0; i < n; ++i) {
        const Vec mean_h = X * post.mu[i];
        const Vec quad = ((X * post.sigma[i]).cwiseProduct(X)).rowwise().sum();
        for (std::size_t k = 0; k < n_int; ++k) {
            double q = quad[k];
            if (q < -1e-9 * (1.0 + std::abs(mean_h[k])))
                throw std::runtime_error("compute_vb_moments: posterior covariance not PSD");
            if (q < 0.0) q = 0.0;
            const double root = std::sqrt(mean_h[k] * mean_h[k] + q);
            const double s = static_cast<double>(table.state(k, i));
            const double rho = table.durations[k] * table.gamma *
                               std::exp(s * mean_h[k] - log_2cosh(root));
            m.interval_rho(k, i) = rho;
            m.interval_omega(k, i) = pg_mean(rho, 2.0 * root);
        }
    }

    for (std::size_t f = 0; f < n_flips; ++f) {
        const int i = table.flip_spin[f];
        const Vec x = table.augmented_state(f);  // flip f ends interval f
        const double mh = post.mu[i].dot(x);
        double q = x.dot(post.sigma[i] * x);
        if (q < 0.0) {
            if (q < -1e-9 * (1.0 + std::abs(mh)))
                throw std::runtime_error("compute_vb_moments: posterior covariance not PSD");
            q = 0.0;
        }
        m.flip_omega[f] = pg_mean(1.0, 2.0 * std::sqrt(mh * mh + q));
    }
    return m;
}

}  // namespace kinising
