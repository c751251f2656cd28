// Internal: streaming assembly of the per-row normal equations. The
// fitters never materialize an IntervalTable or AugmentedMoments on
// large data; interval states are buffered in chunks and reduced with
// dense matrix products, flip events are rank-1 updates on the owning
// row only.
#pragma once

#include "kinising/em.hpp"
#include "kinising/interval.hpp"
#include "kinising/likelihood.hpp"
#include "kinising/moments.hpp"
#include "kinising/vb.hpp"

#include <cstddef>

namespace kinising::detail {

constexpr int kChunk = 256;
constexpr std::size_t kRefreshStride = 1u << 16;

class SystemAssembler {
public:
    explicit SystemAssembler(int n)
        : n_(n), xc_(kChunk, n + 1), w_omega_(n, kChunk), c_rho_(n, kChunk) {
        sys_.A.assign(n, Mat::Zero(n + 1, n + 1));
        sys_.b = Mat::Zero(n, n + 1);
    }

    /// rho_row/omega_row are the per-spin interval moments; x is the
    /// augmented state (1, s_1, ..., s_N).
    void add_interval(const Vec& x, const Vec& rho_row, const Vec& omega_row) {
        xc_.row(kc_) = x;
        for (int i = 0; i < n_; ++i) {
            w_omega_(i, kc_) = omega_row[i];
            c_rho_(i, kc_) = rho_row[i] * x[i + 1];
        }
        if (++kc_ == kChunk) flush();
    }

    void add_flip(int spin, const Vec& x, double omega) {
        sys_.A[spin].selfadjointView<Eigen::Lower>().rankUpdate(x, 4.0 * omega);
        sys_.b.row(spin).noalias() -= x[spin + 1] * x.transpose();
    }

    LinearSystem finish() {
        flush();
        // only the lower triangle was accumulated
        for (Mat& a : sys_.A) a = a.selfadjointView<Eigen::Lower>();
        return std::move(sys_);
    }

private:
    void flush() {
        if (kc_ == 0) return;
        const auto xb = xc_.topRows(kc_);
        sys_.b.noalias() += c_rho_.leftCols(kc_) * xb;
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n_; ++i) {
            // w x x' summed over the chunk as a symmetric rank update of
            // sqrt(w)-scaled states; omega is a Polya-Gamma mean, >= 0
            Mat u = w_omega_.row(i).head(kc_).transpose().cwiseSqrt().asDiagonal() * xb;
            sys_.A[i].selfadjointView<Eigen::Lower>().rankUpdate(u.transpose(), 4.0);
        }
        kc_ = 0;
    }

    int n_;
    int kc_ = 0;
    Mat xc_;
    Mat w_omega_;
    Mat c_rho_;
    LinearSystem sys_;
};

/// Interval/flip moment weights at a point estimate, with the field
/// vector maintained incrementally across flips.
class EmWeightModel {
public:
    EmWeightModel(const SpinTrajectory& traj, const IsingModel& model)
        : model_(model), s_(traj.n_spins) {
        for (int i = 0; i < traj.n_spins; ++i) s_[i] = static_cast<double>(traj.initial_state[i]);
        h_ = model_.theta + model_.J * s_;
    }

    void interval_weights(const Vec&, double duration, Vec& rho, Vec& omega) const {
        const int n = static_cast<int>(s_.size());
        for (int i = 0; i < n; ++i) {
            rho[i] = duration * model_.gamma * logistic(2.0 * s_[i] * h_[i]);
            omega[i] = pg_mean(rho[i], 2.0 * h_[i]);
        }
    }

    double flip_omega(int spin, const Vec&) const { return pg_mean(1.0, 2.0 * h_[spin]); }

    void apply_flip(int spin, const Vec&) {
        h_ -= 2.0 * s_[spin] * model_.J.col(spin);
        s_[spin] = -s_[spin];
        if (++flip_count_ % kRefreshStride == 0) h_ = model_.theta + model_.J * s_;
    }

private:
    const IsingModel& model_;
    Vec s_;
    Vec h_;
    std::size_t flip_count_ = 0;
};

/// Variational weights: per row the caches m_i = mu_i.x, v_i = Sigma_i x
/// and q_i = x'Sigma_i x are updated in O(N) per flip (one coordinate of
/// x changes by +-2) and refreshed periodically against drift.
class VbWeightModel {
public:
    VbWeightModel(const SpinTrajectory& traj, const RowPosteriorSet& post, double gamma)
        : post_(post), gamma_(gamma), n_(traj.n_spins), x_(traj.n_spins + 1) {
        x_[0] = 1.0;
        for (int i = 0; i < n_; ++i) x_[i + 1] = static_cast<double>(traj.initial_state[i]);
        refresh();
    }

    void interval_weights(const Vec&, double duration, Vec& rho, Vec& omega) const {
        for (int i = 0; i < n_; ++i) {
            const double root = this->root(i);
            rho[i] = duration * gamma_ * std::exp(x_[i + 1] * m_[i] - log_2cosh(root));
            omega[i] = pg_mean(rho[i], 2.0 * root);
        }
    }

    double flip_omega(int spin, const Vec&) const {
        return pg_mean(1.0, 2.0 * root(spin));
    }

    void apply_flip(int spin, const Vec&) {
        const int j = spin + 1;
        const double delta = -2.0 * x_[j];
        for (int i = 0; i < n_; ++i) {
            m_[i] += delta * post_.mu[i][j];
            q_[i] += 2.0 * delta * v_[i][j] + delta * delta * post_.sigma[i](j, j);
            v_[i] += delta * post_.sigma[i].col(j);
        }
        x_[j] = -x_[j];
        if (++flip_count_ % (kRefreshStride / 16) == 0) refresh();
    }

    double mean_h(int i) const { return m_[i]; }
    double second_moment_h(int i) const { return m_[i] * m_[i] + std::max(q_[i], 0.0); }
    double root(int i) const { return std::sqrt(second_moment_h(i)); }

private:
    void refresh() {
        m_.resize(n_);
        q_.resize(n_);
        v_.assign(n_, Vec());
        for (int i = 0; i < n_; ++i) {
            m_[i] = post_.mu[i].dot(x_);
            v_[i] = post_.sigma[i] * x_;
            q_[i] = x_.dot(v_[i]);
        }
    }

    const RowPosteriorSet& post_;
    double gamma_;
    int n_;
    Vec x_;
    Vec m_;
    Vec q_;
    std::vector<Vec> v_;
    std::size_t flip_count_ = 0;
};

template <class WeightModel>
LinearSystem assemble_streaming(const SpinTrajectory& traj, WeightModel& w) {
    const int n = traj.n_spins;
    SystemAssembler acc(n);
    Vec rho(n), omega(n);
    walk_intervals(
        traj,
        [&](std::size_t, double dur, const Vec& x) {
            w.interval_weights(x, dur, rho, omega);
            acc.add_interval(x, rho, omega);
        },
        [&](std::size_t, int spin, const Vec& x) {
            acc.add_flip(spin, x, w.flip_omega(spin, x));
            w.apply_flip(spin, x);
        });
    return acc.finish();
}

}  // namespace kinising::detail
