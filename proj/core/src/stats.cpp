#include "kinising/stats.hpp"

#include "kinising/interval.hpp"
#include "kinising/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kinising {

StatsReport trajectory_stats(const SpinTrajectory& traj, int order, int subset_budget,
                             std::uint64_t seed) {
    traj.validate();
    if (order < 2 || order > 4) throw std::invalid_argument("trajectory_stats: order must be 2..4");
    if (subset_budget < 0) throw std::invalid_argument("trajectory_stats: negative subset budget");
    const int n = traj.n_spins;
    const double t_total = traj.t_end;

    StatsReport rep;
    rep.t_end = t_total;
    rep.subset_seed = seed;

    // first pass: means and raw second moments
    Vec acc1 = Vec::Zero(n);
    Mat acc2 = Mat::Zero(n, n);
    walk_intervals(
        traj,
        [&](std::size_t, double dur, const Vec& x) {
            const auto s = x.tail(n);
            acc1 += dur * s;
            acc2.noalias() += dur * (s * s.transpose());
        },
        [](std::size_t, int, const Vec&) {});
    rep.m = acc1 / t_total;
    rep.c2 = acc2 / t_total - rep.m * rep.m.transpose();

    if (order < 3 || subset_budget == 0) return rep;

    // sampled higher-order tuples (strictly increasing indices, drawn
    // with replacement); one stream drives both orders
    Rng rng(seed);
    auto draw_tuples = [&](int k) {
        std::vector<std::array<int, 4>> tuples;
        if (n < k) return tuples;
        long attempts = 0;
        const long max_attempts = 200L * subset_budget + 1000;
        while (static_cast<int>(tuples.size()) < subset_budget && attempts < max_attempts) {
            ++attempts;
            std::array<int, 4> t{-1, -1, -1, -1};
            for (int a = 0; a < k; ++a) t[a] = rng.uniform_index(n);
            std::sort(t.begin(), t.begin() + k);
            bool distinct = true;
            for (int a = 1; a < k; ++a)
                if (t[a] == t[a - 1]) distinct = false;
            if (distinct) tuples.push_back(t);
        }
        return tuples;
    };

    const auto t3 = draw_tuples(3);
    const auto t4 = (order >= 4) ? draw_tuples(4) : std::vector<std::array<int, 4>>{};

    std::vector<double> acc3(t3.size(), 0.0), acc4(t4.size(), 0.0);
    walk_intervals(
        traj,
        [&](std::size_t, double dur, const Vec& x) {
            for (std::size_t k = 0; k < t3.size(); ++k) {
                const auto& t = t3[k];
                acc3[k] += dur * (x[t[0] + 1] - rep.m[t[0]]) * (x[t[1] + 1] - rep.m[t[1]]) *
                           (x[t[2] + 1] - rep.m[t[2]]);
            }
            for (std::size_t k = 0; k < t4.size(); ++k) {
                const auto& t = t4[k];
                acc4[k] += dur * (x[t[0] + 1] - rep.m[t[0]]) * (x[t[1] + 1] - rep.m[t[1]]) *
                           (x[t[2] + 1] - rep.m[t[2]]) * (x[t[3] + 1] - rep.m[t[3]]);
            }
        },
        [](std::size_t, int, const Vec&) {});

    for (std::size_t k = 0; k < t3.size(); ++k)
        rep.c3.push_back({t3[k], acc3[k] / t_total});
    for (std::size_t k = 0; k < t4.size(); ++k)
        rep.c4.push_back({t4[k], acc4[k] / t_total});
    return rep;
}

double mse(const Mat& j_true, const Mat& j_est) {
    if (j_true.rows() != j_est.rows() || j_true.cols() != j_est.cols())
        throw std::invalid_argument("mse: shape mismatch");
    return (j_true - j_est).squaredNorm() / static_cast<double>(j_true.size());
}

RocCurve roc_auc(const std::vector<char>& truth_nonzero, const std::vector<double>& scores) {
    const std::size_t n = truth_nonzero.size();
    if (scores.size() != n) throw std::invalid_argument("roc_auc: size mismatch");
    std::size_t pos = 0;
    for (char t : truth_nonzero) pos += (t != 0);
    const std::size_t neg = n - pos;
    if (pos == 0 || neg == 0)
        throw std::invalid_argument("roc_auc: truth must contain both classes");

    std::vector<std::size_t> idx(n);
    for (std::size_t k = 0; k < n; ++k) idx[k] = k;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve roc;
    roc.thresholds.push_back(std::numeric_limits<double>::infinity());
    roc.fpr.push_back(0.0);
    roc.tpr.push_back(0.0);

    std::size_t tp = 0, fp = 0;
    std::size_t k = 0;
    while (k < n) {
        const double z = scores[idx[k]];
        while (k < n && scores[idx[k]] == z) {
            if (truth_nonzero[idx[k]]) ++tp; else ++fp;
            ++k;
        }
        roc.thresholds.push_back(z);
        roc.fpr.push_back(static_cast<double>(fp) / static_cast<double>(neg));
        roc.tpr.push_back(static_cast<double>(tp) / static_cast<double>(pos));
    }

    double auc = 0.0;
    for (std::size_t p = 1; p < roc.fpr.size(); ++p)
        auc += (roc.fpr[p] - roc.fpr[p - 1]) * 0.5 * (roc.tpr[p] + roc.tpr[p - 1]);
    roc.auc = auc;
    return roc;
}

double pearson(const Vec& x, const Vec& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("pearson: need equal lengths >= 2");
    const double mx = x.mean();
    const double my = y.mean();
    const Vec dx = x.array() - mx;
    const Vec dy = y.array() - my;
    const double sx = dx.squaredNorm();
    const double sy = dy.squaredNorm();
    if (sx == 0.0 || sy == 0.0) throw std::invalid_argument("pearson: zero variance");
    return dx.dot(dy) / std::sqrt(sx * sy);
}

}  // namespace kinising
