#pragma once

#include "kinising/types.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace kinising {

/// Exact time-weighted trajectory moments (no discretization): means,
/// second-order central correlations and, on request, sampled third and
/// fourth order central moments over a seeded random subset of index
/// tuples.
struct StatsReport {
    Vec m;    // time-averaged spin means
    Mat c2;   // (1/T) int (s_i - m_i)(s_j - m_j) dt
    struct Tuple {
        std::array<int, 4> idx;  // idx[3] = -1 for third order
        double value;
    };
    std::vector<Tuple> c3;
    std::vector<Tuple> c4;
    double t_end = 0.0;
    std::uint64_t subset_seed = 0;
};

/// order selects how deep to go (2, 3 or 4); tuples are sampled with
/// replacement from the strictly increasing index combinations.
StatsReport trajectory_stats(const SpinTrajectory& traj, int order, int subset_budget,
                             std::uint64_t seed);

/// Mean squared elementwise difference over all N^2 couplings.
double mse(const Mat& j_true, const Mat& j_est);

struct RocCurve {
    std::vector<double> thresholds;  // descending, starting at +inf
    std::vector<double> fpr;
    std::vector<double> tpr;
    double auc = 0.0;
};

/// Threshold-sweep classification curve: an entry is predicted nonzero
/// when its score >= z, for z descending through +inf and every
/// distinct score. Ties share one threshold; AUC is the trapezoidal
/// area. Throws when truth is all-true or all-false.
RocCurve roc_auc(const std::vector<char>& truth_nonzero, const std::vector<double>& scores);

/// Sample Pearson correlation coefficient; throws on zero variance.
double pearson(const Vec& x, const Vec& y);

}  // namespace kinising
