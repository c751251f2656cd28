#include "kinising/em.hpp"

#include "assembly.hpp"
#include "kinising/likelihood.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

namespace kinising {

void EmConfig::validate() const {
    if (max_iters < 1) throw std::invalid_argument("em config: max_iters must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("em config: tol must be positive");
    if (lambda < 0.0) throw std::invalid_argument("em config: lambda must be >= 0");
    if (jitter < 0.0) throw std::invalid_argument("em config: jitter must be >= 0");
}

LinearSystem assemble_system(const IntervalTable& table, const AugmentedMoments& moments) {
    const int n = table.n_spins();
    const std::size_t n_int = table.n_intervals();
    const std::size_t n_flips = table.flip_spin.size();
    if (moments.interval_rho.rows() != static_cast<Eigen::Index>(n_int) ||
        moments.flip_omega.size() != static_cast<Eigen::Index>(n_flips))
        throw std::invalid_argument("assemble_system: moments do not match table");

    detail::SystemAssembler acc(n);
    // flips are folded in at their position so the accumulation order
    // matches the streaming path
    std::size_t f = 0;
    Vec rho(n), omega(n);
    for (std::size_t k = 0; k < n_int; ++k) {
        const Vec x = table.augmented_state(k);
        rho = moments.interval_rho.row(k);
        omega = moments.interval_omega.row(k);
        acc.add_interval(x, rho, omega);
        if (f < n_flips && f == k) {
            acc.add_flip(table.flip_spin[f], x, moments.flip_omega[f]);
            ++f;
        }
    }
    return acc.finish();
}

Vec solve_row(const LinearSystem& system, int i, double jitter, const Vec* l1_diag) {
    const Mat& a = system.A[i];
    const auto b = system.b.row(i).transpose();
    const int d = static_cast<int>(a.rows());

    Mat m = a;
    if (l1_diag) {
        if (l1_diag->size() != d - 1)
            throw std::invalid_argument("solve_row: l1_diag must have N entries");
        m.diagonal().tail(d - 1) += *l1_diag;
    }

    double jit = jitter;
    const double b_norm = b.norm();
    while (true) {
        Mat mj = m;
        mj.diagonal().array() += jit;
        Eigen::LLT<Mat> llt(mj);
        if (llt.info() == Eigen::Success) {
            Vec sol = llt.solve(b);
            const double resid = (mj * sol - b).norm();
            if (resid <= 1e-8 * std::max(b_norm, 1e-300)) return sol;
        }
        jit = (jit == 0.0) ? 1e-12 : jit * 10.0;
        if (jit > 1e-4)
            throw std::runtime_error("solve_row: factorization failed after jitter escalation");
    }
}

FitReport em_fit(const SpinTrajectory& traj, double gamma, const EmConfig& cfg) {
    traj.validate();
    cfg.validate();
    if (!(gamma > 0.0)) throw std::invalid_argument("em_fit: gamma must be positive");
    const int n = traj.n_spins;

    IsingModel model = cfg.init ? *cfg.init : IsingModel::zeros(n, gamma);
    model.gamma = gamma;
    model.validate();
    if (model.n_spins() != n) throw std::invalid_argument("em_fit: init model dimension mismatch");

    auto penalty = [&](const IsingModel& m) {
        return cfg.lambda > 0.0 ? cfg.lambda * m.J.cwiseAbs().sum() : 0.0;
    };

    FitReport rep;
    double ll = log_likelihood(traj, model);
    double obj = ll - penalty(model);
    rep.loglik_trace.push_back(ll);
    rep.penalized_trace.push_back(obj);

    Vec l1_diag(n);
    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        detail::EmWeightModel weights(traj, model);
        LinearSystem sys = detail::assemble_streaming(traj, weights);

        for (int i = 0; i < n; ++i) {
            const Vec* l1 = nullptr;
            if (cfg.lambda > 0.0) {
                for (int j = 0; j < n; ++j)
                    l1_diag[j] = cfg.lambda * cfg.lambda * gig_beta_mean(model.J(i, j), cfg.lambda);
                l1 = &l1_diag;
            }
            const Vec row = solve_row(sys, i, cfg.jitter, l1);
            model.theta[i] = row[0];
            model.J.row(i) = row.tail(n);
        }

        ll = log_likelihood(traj, model);
        const double obj_new = ll - penalty(model);
        if (!std::isfinite(obj_new)) throw std::runtime_error("em_fit: non-finite objective");
        rep.loglik_trace.push_back(ll);
        rep.penalized_trace.push_back(obj_new);
        rep.iterations = iter;

        const double rel = std::abs(obj_new - obj) / std::max(std::abs(obj_new), 1e-300);
        obj = obj_new;
        if (rel < cfg.tol) {
            rep.converged = true;
            break;
        }
    }
    rep.model = std::move(model);
    return rep;
}

}  // namespace kinising
