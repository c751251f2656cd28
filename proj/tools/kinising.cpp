// kinising: one binary, subcommand style. Every subcommand is a pure
// function of (flags, seeds, input files) and writes a run manifest
// alongside its outputs; `kinising rerun --manifest m.json` replays the
// recorded invocation byte-for-byte.
//
// Exit codes: 0 success, 1 validation/usage error, 2 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include "kinising/em.hpp"
#include "kinising/io.hpp"
#include "kinising/lif.hpp"
#include "kinising/likelihood.hpp"
#include "kinising/sampler.hpp"
#include "kinising/stats.hpp"
#include "kinising/vb.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using kinising::IsingModel;
using kinising::IVec;
using kinising::Mat;
using kinising::RowPosteriorSet;
using kinising::SpinTrajectory;
using kinising::Vec;
using nlohmann::json;

int run(std::vector<std::string> args);  // forward, for rerun

// ---------------------------------------------------------------- manifest

struct Manifest {
    std::string subcommand;
    std::vector<std::string> argv;
    std::map<std::string, std::string> flags;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::string path;  // explicit --manifest destination, may be empty
};

void collect_flags(const CLI::App* cmd, Manifest& man) {
    for (const CLI::Option* opt : cmd->get_options()) {
        const std::string name = opt->get_name();
        if (name.empty() || name == "--help") continue;
        if (opt->count() > 0) {
            std::string v;
            for (const auto& r : opt->results()) {
                if (!v.empty()) v += ',';
                v += r;
            }
            man.flags[name] = v.empty() ? "true" : v;
        } else if (!opt->get_default_str().empty()) {
            man.flags[name] = opt->get_default_str();
        }
    }
    for (const CLI::App* sub : cmd->get_subcommands(nullptr))
        if (sub->parsed()) collect_flags(sub, man);
}

void write_manifest(const Manifest& man, double wall_seconds) {
    std::string path = man.path;
    if (path.empty()) {
        if (man.outputs.empty()) return;
        path = man.outputs.front() + ".manifest.json";
    }
    json j;
    j["subcommand"] = man.subcommand;
    j["version"] = kinising::kVersion;
    j["argv"] = man.argv;
    j["flags"] = man.flags;
    j["seeds"] = man.seeds;
    j["inputs"] = man.inputs;
    j["outputs"] = man.outputs;
    j["wall_time_s"] = wall_seconds;
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write manifest: " + path);
    out << j.dump(2) << '\n';
}

// ------------------------------------------------------------------ helpers

std::vector<double> parse_grid(const std::string& spec) {
    const auto c1 = spec.find(':');
    const auto c2 = spec.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw std::invalid_argument("grid spec must be lo:hi:count[log], got '" + spec + "'");
    double lo, hi;
    int count;
    bool log_spaced = false;
    try {
        lo = std::stod(spec.substr(0, c1));
        hi = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
        std::string tail = spec.substr(c2 + 1);
        if (tail.size() >= 3 && tail.substr(tail.size() - 3) == "log") {
            log_spaced = true;
            tail.resize(tail.size() - 3);
        }
        count = std::stoi(tail);
    } catch (const std::exception&) {
        throw std::invalid_argument("grid spec must be lo:hi:count[log], got '" + spec + "'");
    }
    if (count < 1 || !(hi >= lo) || (log_spaced && !(lo > 0.0)))
        throw std::invalid_argument("bad grid bounds in '" + spec + "'");
    std::vector<double> pts(count);
    if (count == 1) {
        pts[0] = lo;
        return pts;
    }
    for (int k = 0; k < count; ++k) {
        const double f = static_cast<double>(k) / (count - 1);
        pts[k] = log_spaced ? lo * std::pow(hi / lo, f) : lo + f * (hi - lo);
    }
    return pts;
}

SpinTrajectory truncate_trajectory(const SpinTrajectory& traj, double t_end) {
    if (!(t_end > 0.0) || t_end > traj.t_end)
        throw std::invalid_argument("truncation time out of range");
    SpinTrajectory out;
    out.n_spins = traj.n_spins;
    out.t_end = t_end;
    out.initial_state = traj.initial_state;
    for (const auto& f : traj.flips) {
        if (f.t >= t_end) break;
        out.flips.push_back(f);
    }
    return out;
}

IsingModel posterior_mean_model(const RowPosteriorSet& post, double gamma) {
    const int n = post.n_spins();
    IsingModel m;
    m.gamma = gamma;
    m.theta.resize(n);
    m.J.resize(n, n);
    for (int i = 0; i < n; ++i) {
        m.theta[i] = post.mu[i][0];
        m.J.row(i) = post.mu[i].tail(n);
    }
    return m;
}

double resolve_gamma(double flag_value, const std::optional<double>& from_file) {
    if (flag_value > 0.0) return flag_value;
    if (from_file && *from_file > 0.0) return *from_file;
    throw std::invalid_argument("gamma not given and absent from trajectory file");
}

// VB nonzero-coupling score |mu_ij| / sqrt((Sigma_i)_jj); EM score |J_ij|.
void coupling_scores(const Mat* j_est, const RowPosteriorSet* post, bool skip_diagonal,
                     const Eigen::MatrixXi& truth, std::vector<char>& truth_flat,
                     std::vector<double>& scores) {
    const int n = static_cast<int>(truth.rows());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (skip_diagonal && i == j) continue;
            truth_flat.push_back(truth(i, j) != 0);
            if (j_est)
                scores.push_back(std::abs((*j_est)(i, j)));
            else
                scores.push_back(std::abs(post->mu[i][j + 1]) /
                                 std::sqrt(post->sigma[i](j + 1, j + 1)));
        }
}

void write_roc_csv(const std::string& path, const kinising::RocCurve& roc) {
    kinising::CsvWriter csv(path);
    csv.header({"threshold", "fpr", "tpr"});
    for (std::size_t k = 0; k < roc.thresholds.size(); ++k)
        csv.row({roc.thresholds[k], roc.fpr[k], roc.tpr[k]});
}

Eigen::MatrixXi nonzero_mask(const Mat& j) {
    Eigen::MatrixXi m(j.rows(), j.cols());
    for (Eigen::Index i = 0; i < j.rows(); ++i)
        for (Eigen::Index k = 0; k < j.cols(); ++k) m(i, k) = j(i, k) != 0.0;
    return m;
}

// ----------------------------------------------------------------- commands

struct GenerateOpts {
    int n = 40;
    double t_end = 1000.0;
    double g = 0.3;
    double gamma = 100.0;
    double p_sparse = 0.0;
    double theta_mean = 0.0;
    double theta_sd = 0.0;
    std::uint64_t seed = 1;
    std::string out_model, out_traj;
};

void cmd_generate(const GenerateOpts& o, Manifest& man) {
    kinising::GenConfig cfg;
    cfg.n_spins = o.n;
    cfg.t_end = o.t_end;
    cfg.g = o.g;
    cfg.p_sparse = o.p_sparse;
    cfg.theta_gaussian = o.theta_sd > 0.0 || o.theta_mean != 0.0;
    cfg.theta_mean = o.theta_mean;
    cfg.theta_sd = o.theta_sd;
    cfg.seed = o.seed;
    cfg.validate();
    // seed streams: model = seed, initial state = seed + 1, dynamics = seed + 2
    const IsingModel model = kinising::generate_model(cfg, o.gamma);
    const IVec s0 = kinising::random_state(o.n, o.seed + 1);
    const SpinTrajectory traj = kinising::gillespie_sample(model, s0, o.t_end, o.seed + 2);
    kinising::write_model_json(o.out_model, model);
    kinising::write_trajectory_json(o.out_traj, traj, o.gamma);
    man.seeds = {o.seed, o.seed + 1, o.seed + 2};
    man.outputs = {o.out_model, o.out_traj};
}

struct LifSimOpts {
    double t_end = 10.0;
    std::string scale = "desk";
    std::uint64_t seed = 7;
    int keep_e = 30;
    int keep_i = 10;
    double active_ms = 10.0;
    double dt_ms = 0.05;
    std::string out_spikes, out_traj;
};

kinising::LifConfig lif_config_for(const std::string& scale, double t_end, double dt_ms,
                                   std::uint64_t seed) {
    kinising::LifConfig cfg;
    if (scale == "desk") {
        cfg.n_x = 200;
        cfg.n_e = 200;
        cfg.n_i = 50;
    } else if (scale != "paper") {
        throw std::invalid_argument("scale must be desk or paper");
    }
    cfg.t_end = t_end;
    cfg.dt_sim = dt_ms * 1e-3;
    cfg.seed = seed;
    return cfg;
}

void cmd_lif_sim(const LifSimOpts& o, Manifest& man) {
    const kinising::LifConfig cfg = lif_config_for(o.scale, o.t_end, o.dt_ms, o.seed);
    const kinising::SpikeRecord rec = kinising::lif_simulate(cfg);
    kinising::write_spikes_json(o.out_spikes, rec);
    const SpinTrajectory traj =
        kinising::select_and_binarize(rec, o.keep_e, o.keep_i, o.active_ms * 1e-3);
    kinising::write_trajectory_json(o.out_traj, traj, std::nullopt);
    man.seeds = {o.seed};
    man.outputs = {o.out_spikes, o.out_traj};
}

struct FitEmOpts {
    std::string traj;
    double gamma = -1.0;
    double lambda = 0.0;
    double tol = 1e-8;
    int max_iters = 100;
    std::string out, trace;
};

void cmd_fit_em(const FitEmOpts& o, Manifest& man) {
    std::optional<double> file_gamma;
    const SpinTrajectory traj = kinising::read_trajectory_json(o.traj, &file_gamma);
    const double gamma = resolve_gamma(o.gamma, file_gamma);
    kinising::EmConfig cfg;
    cfg.max_iters = o.max_iters;
    cfg.tol = o.tol;
    cfg.lambda = o.lambda;
    const kinising::FitReport rep = kinising::em_fit(traj, gamma, cfg);
    kinising::write_model_json(o.out, rep.model);
    man.inputs = {o.traj};
    man.outputs = {o.out};
    if (!o.trace.empty()) {
        kinising::CsvWriter csv(o.trace);
        csv.header({"iter", "loglik", "penalized_obj"});
        for (std::size_t k = 0; k < rep.loglik_trace.size(); ++k)
            csv.row({static_cast<double>(k), rep.loglik_trace[k], rep.penalized_trace[k]});
        man.outputs.push_back(o.trace);
    }
    if (!rep.converged)
        std::cerr << "warning: fit-em stopped after " << rep.iterations
                  << " iterations without reaching tol\n";
}

struct FitVbOpts {
    std::string traj;
    double gamma = -1.0;
    double lambda = 1.0;
    double mu_theta = 0.0;
    double lambda_theta = 1.0;
    double tol = 1e-8;
    int max_iters = 100;
    std::string out_posterior, out_model, trace;
};

void cmd_fit_vb(const FitVbOpts& o, Manifest& man) {
    std::optional<double> file_gamma;
    const SpinTrajectory traj = kinising::read_trajectory_json(o.traj, &file_gamma);
    const double gamma = resolve_gamma(o.gamma, file_gamma);
    kinising::PriorConfig prior;
    prior.lambda = o.lambda;
    prior.mu_theta = o.mu_theta;
    prior.lambda_theta = o.lambda_theta;
    prior.validate();
    kinising::EmConfig cfg;
    cfg.max_iters = o.max_iters;
    cfg.tol = o.tol;
    const kinising::VbReport rep = kinising::vb_fit(traj, gamma, prior, cfg);
    kinising::write_posterior_json(o.out_posterior, rep.posterior);
    man.inputs = {o.traj};
    man.outputs = {o.out_posterior};
    if (!o.out_model.empty()) {
        kinising::write_model_json(o.out_model, posterior_mean_model(rep.posterior, gamma));
        man.outputs.push_back(o.out_model);
    }
    if (!o.trace.empty()) {
        kinising::CsvWriter csv(o.trace);
        csv.header({"iter", "free_energy"});
        for (std::size_t k = 0; k < rep.free_energy_trace.size(); ++k)
            csv.row({static_cast<double>(k), rep.free_energy_trace[k]});
        man.outputs.push_back(o.trace);
    }
    if (!rep.converged)
        std::cerr << "warning: fit-vb stopped after " << rep.iterations
                  << " iterations without reaching tol\n";
}

struct SweepOpts {
    std::string traj, test_traj;
    double gamma = -1.0;
    std::string grid = "1:1000:12log";
    std::string method = "vb";
    double mu_theta = 0.0;
    double lambda_theta = 1.0;
    double tol = 1e-6;
    int max_iters = 100;
    std::string out;
};

void cmd_sweep_lambda(const SweepOpts& o, Manifest& man) {
    std::optional<double> file_gamma;
    const SpinTrajectory traj = kinising::read_trajectory_json(o.traj, &file_gamma);
    const double gamma = resolve_gamma(o.gamma, file_gamma);
    const std::vector<double> grid = parse_grid(o.grid);
    man.inputs = {o.traj};
    man.outputs = {o.out};
    kinising::CsvWriter csv(o.out);
    if (o.method == "vb") {
        csv.header({"lambda", "free_energy", "iters"});
        for (double lambda : grid) {
            kinising::PriorConfig prior;
            prior.lambda = lambda;
            prior.mu_theta = o.mu_theta;
            prior.lambda_theta = o.lambda_theta;
            kinising::EmConfig cfg;
            cfg.max_iters = o.max_iters;
            cfg.tol = o.tol;
            const kinising::VbReport rep = kinising::vb_fit(traj, gamma, prior, cfg);
            csv.row({lambda, rep.free_energy, static_cast<double>(rep.iterations)});
        }
    } else if (o.method == "em") {
        if (o.test_traj.empty())
            throw std::invalid_argument("--method em requires --test-traj for held-out scoring");
        const SpinTrajectory test = kinising::read_trajectory_json(o.test_traj);
        man.inputs.push_back(o.test_traj);
        csv.header({"lambda", "test_loglik", "iters"});
        for (double lambda : grid) {
            kinising::EmConfig cfg;
            cfg.max_iters = o.max_iters;
            cfg.tol = o.tol;
            cfg.lambda = lambda;
            const kinising::FitReport rep = kinising::em_fit(traj, gamma, cfg);
            csv.row({lambda, kinising::log_likelihood(test, rep.model),
                     static_cast<double>(rep.iterations)});
        }
    } else {
        throw std::invalid_argument("method must be vb or em");
    }
}

struct EvalStatsOpts {
    std::string traj;
    int order = 2;
    int budget = 2000;
    std::uint64_t seed = 0;
    std::string out;
};

void cmd_eval_stats(const EvalStatsOpts& o, Manifest& man) {
    const SpinTrajectory traj = kinising::read_trajectory_json(o.traj);
    const kinising::StatsReport rep =
        kinising::trajectory_stats(traj, o.order, o.budget, o.seed);
    man.inputs = {o.traj};
    man.outputs = {o.out};
    kinising::CsvWriter csv(o.out);
    csv.header({"order", "i", "j", "k", "l", "value"});
    const int n = traj.n_spins;
    for (int i = 0; i < n; ++i) csv.row({1, double(i), -1, -1, -1, rep.m[i]});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) csv.row({2, double(i), double(j), -1, -1, rep.c2(i, j)});
    for (const auto& t : rep.c3)
        csv.row({3, double(t.idx[0]), double(t.idx[1]), double(t.idx[2]), -1, t.value});
    for (const auto& t : rep.c4)
        csv.row({4, double(t.idx[0]), double(t.idx[1]), double(t.idx[2]), double(t.idx[3]),
                 t.value});
}

struct EvalMseOpts {
    std::string truth, est;
    bool include_theta = false;
    std::string out;
};

void cmd_eval_mse(const EvalMseOpts& o, Manifest& man) {
    const IsingModel a = kinising::read_model_json(o.truth);
    const IsingModel b = kinising::read_model_json(o.est);
    double value = kinising::mse(a.J, b.J);
    if (o.include_theta) {
        const double n2 = static_cast<double>(a.J.size());
        const double nt = static_cast<double>(a.theta.size());
        if (b.theta.size() != a.theta.size())
            throw std::invalid_argument("eval mse: theta length mismatch");
        value = (value * n2 + (a.theta - b.theta).squaredNorm()) / (n2 + nt);
    }
    man.inputs = {o.truth, o.est};
    std::cout << kinising::format_double(value) << '\n';
    if (!o.out.empty()) {
        kinising::CsvWriter csv(o.out);
        csv.header({"mse"});
        csv.row({value});
        man.outputs = {o.out};
    }
}

struct EvalRocOpts {
    std::string truth, est, posterior;
    bool exclude_diagonal = false;
    std::string out;
};

void cmd_eval_roc(const EvalRocOpts& o, Manifest& man) {
    if (o.est.empty() == o.posterior.empty())
        throw std::invalid_argument("eval roc: give exactly one of --est or --posterior");
    const IsingModel truth_model = kinising::read_model_json(o.truth);
    const Eigen::MatrixXi truth = nonzero_mask(truth_model.J);
    std::vector<char> truth_flat;
    std::vector<double> scores;
    man.inputs = {o.truth};
    if (!o.est.empty()) {
        const IsingModel est = kinising::read_model_json(o.est);
        if (est.J.rows() != truth.rows())
            throw std::invalid_argument("eval roc: size mismatch");
        coupling_scores(&est.J, nullptr, o.exclude_diagonal, truth, truth_flat, scores);
        man.inputs.push_back(o.est);
    } else {
        const RowPosteriorSet post = kinising::read_posterior_json(o.posterior);
        if (post.n_spins() != truth.rows())
            throw std::invalid_argument("eval roc: size mismatch");
        coupling_scores(nullptr, &post, o.exclude_diagonal, truth, truth_flat, scores);
        man.inputs.push_back(o.posterior);
    }
    const kinising::RocCurve roc = kinising::roc_auc(truth_flat, scores);
    std::cout << kinising::format_double(roc.auc) << '\n';
    if (!o.out.empty()) {
        write_roc_csv(o.out, roc);
        man.outputs = {o.out};
    }
}

// ------------------------------------------------------------------- repro

struct ReproOpts {
    std::string figure;
    std::string scale = "desk";
    std::uint64_t seed = 1;
    std::string out_dir = ".";
};

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

// Coupling recovery vs data length: one long trajectory, EM refits on
// truncations of it.
void repro_fig1(const ReproOpts& o, Manifest& man) {
    std::vector<double> ladder = {125.0, 250.0, 500.0, 1000.0};
    if (o.scale == "paper") ladder = {125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0};
    const double t_max = ladder.back();

    kinising::GenConfig cfg;
    cfg.n_spins = 40;
    cfg.t_end = t_max;
    cfg.g = 0.3;
    cfg.seed = o.seed;
    const double gamma = 100.0;
    const IsingModel model = kinising::generate_model(cfg, gamma);
    const IVec s0 = kinising::random_state(cfg.n_spins, o.seed + 1);
    const SpinTrajectory full = kinising::gillespie_sample(model, s0, t_max, o.seed + 2);
    man.seeds = {o.seed, o.seed + 1, o.seed + 2};

    const std::string model_path = join_path(o.out_dir, "model_true.json");
    kinising::write_model_json(model_path, model);
    const std::string mse_path = join_path(o.out_dir, "mse_vs_T.csv");
    kinising::CsvWriter mse_csv(mse_path);
    mse_csv.header({"t_end", "mse", "pearson", "iters"});

    IsingModel last_fit;
    for (double t_cut : ladder) {
        const SpinTrajectory part = truncate_trajectory(full, t_cut);
        kinising::EmConfig em;
        em.max_iters = 50;
        const kinising::FitReport rep = kinising::em_fit(part, gamma, em);
        const double err = kinising::mse(model.J, rep.model.J);
        const double r = kinising::pearson(
            Eigen::Map<const Vec>(model.J.data(), model.J.size()),
            Eigen::Map<const Vec>(rep.model.J.data(), rep.model.J.size()));
        mse_csv.row({t_cut, err, r, static_cast<double>(rep.iterations)});
        last_fit = rep.model;
    }

    const std::string est_path = join_path(o.out_dir, "model_est.json");
    kinising::write_model_json(est_path, last_fit);
    const std::string scatter_path = join_path(o.out_dir, "scatter_j.csv");
    kinising::CsvWriter sc(scatter_path);
    sc.header({"j_true", "j_est"});
    for (Eigen::Index k = 0; k < model.J.size(); ++k)
        sc.row({model.J.data()[k], last_fit.J.data()[k]});
    man.outputs = {mse_path, model_path, est_path, scatter_path};
}

// Sparse recovery: lambda sweeps for L1-EM held-out likelihood and VB
// free energy, ROC at the respective optima.
void repro_fig2(const ReproOpts& o, Manifest& man) {
    kinising::GenConfig cfg;
    cfg.n_spins = 25;
    cfg.t_end = 50.0;
    cfg.g = 0.3;
    cfg.p_sparse = 0.5;
    cfg.seed = o.seed;
    const double gamma = 100.0;
    const IsingModel model = kinising::generate_model(cfg, gamma);
    const SpinTrajectory train = kinising::gillespie_sample(
        model, kinising::random_state(cfg.n_spins, o.seed + 1), cfg.t_end, o.seed + 2);
    const SpinTrajectory test = kinising::gillespie_sample(
        model, kinising::random_state(cfg.n_spins, o.seed + 3), cfg.t_end, o.seed + 4);
    man.seeds = {o.seed, o.seed + 1, o.seed + 2, o.seed + 3, o.seed + 4};

    const std::vector<double> grid =
        parse_grid(o.scale == "paper" ? "1:1000:24log" : "1:1000:12log");
    const Eigen::MatrixXi truth = nonzero_mask(model.J);

    const std::string em_path = join_path(o.out_dir, "em_sweep.csv");
    const std::string vb_path = join_path(o.out_dir, "vb_sweep.csv");
    kinising::CsvWriter em_csv(em_path);
    em_csv.header({"lambda", "test_loglik", "iters"});
    kinising::CsvWriter vb_csv(vb_path);
    vb_csv.header({"lambda", "free_energy", "iters"});

    double best_em_score = -std::numeric_limits<double>::infinity();
    double best_vb_score = std::numeric_limits<double>::infinity();
    double lambda_em = grid.front(), lambda_vb = grid.front();
    IsingModel best_em_model;
    RowPosteriorSet best_vb_post;
    for (double lambda : grid) {
        kinising::EmConfig em;
        em.lambda = lambda;
        em.tol = 1e-6;
        const kinising::FitReport em_rep = kinising::em_fit(train, gamma, em);
        const double score = kinising::log_likelihood(test, em_rep.model);
        em_csv.row({lambda, score, static_cast<double>(em_rep.iterations)});
        if (score > best_em_score) {
            best_em_score = score;
            lambda_em = lambda;
            best_em_model = em_rep.model;
        }

        kinising::PriorConfig prior;
        prior.lambda = lambda;
        kinising::EmConfig vb;
        vb.tol = 1e-6;
        const kinising::VbReport vb_rep = kinising::vb_fit(train, gamma, prior, vb);
        vb_csv.row({lambda, vb_rep.free_energy, static_cast<double>(vb_rep.iterations)});
        if (vb_rep.free_energy < best_vb_score) {
            best_vb_score = vb_rep.free_energy;
            lambda_vb = lambda;
            best_vb_post = vb_rep.posterior;
        }
    }

    std::vector<char> tf_em, tf_vb;
    std::vector<double> sc_em, sc_vb;
    coupling_scores(&best_em_model.J, nullptr, false, truth, tf_em, sc_em);
    coupling_scores(nullptr, &best_vb_post, false, truth, tf_vb, sc_vb);
    const kinising::RocCurve roc_em = kinising::roc_auc(tf_em, sc_em);
    const kinising::RocCurve roc_vb = kinising::roc_auc(tf_vb, sc_vb);
    const std::string roc_em_path = join_path(o.out_dir, "em_roc.csv");
    const std::string roc_vb_path = join_path(o.out_dir, "vb_roc.csv");
    write_roc_csv(roc_em_path, roc_em);
    write_roc_csv(roc_vb_path, roc_vb);

    const std::string summary_path = join_path(o.out_dir, "summary.csv");
    kinising::CsvWriter summary(summary_path);
    summary.header({"lambda_em", "lambda_vb", "auc_em", "auc_vb"});
    summary.row({lambda_em, lambda_vb, roc_em.auc, roc_vb.auc});
    man.outputs = {em_path, vb_path, roc_em_path, roc_vb_path, summary_path};
}

// Spiking-network pipeline: LIF simulation, binarization, VB fit,
// resampling from the fitted mean model, statistic scatter + synapse ROC.
void repro_fig3(const ReproOpts& o, Manifest& man) {
    const double t_end = o.scale == "paper" ? 300.0 : 60.0;
    const kinising::LifConfig cfg = lif_config_for(o.scale, t_end, 0.05, o.seed);
    const kinising::SpikeRecord rec = kinising::lif_simulate(cfg);
    std::vector<int> selected;
    const int keep_e = 30, keep_i = 10;
    const double active_window = 10e-3;
    const SpinTrajectory traj =
        kinising::select_and_binarize(rec, keep_e, keep_i, active_window, &selected);
    const double gamma = 1.0 / active_window;
    man.seeds = {o.seed};

    const std::string traj_path = join_path(o.out_dir, "binarized_traj.json");
    kinising::write_trajectory_json(traj_path, traj, gamma);

    // small free-energy sweep picks the prior scale
    const std::string sweep_path = join_path(o.out_dir, "vb_sweep.csv");
    kinising::CsvWriter sweep_csv(sweep_path);
    sweep_csv.header({"lambda", "free_energy", "iters"});
    double best_f = std::numeric_limits<double>::infinity();
    double lambda_star = 0.0;
    RowPosteriorSet post;
    for (double lambda : parse_grid("3:100:4log")) {
        kinising::PriorConfig prior;
        prior.lambda = lambda;
        kinising::EmConfig vb;
        vb.tol = 1e-6;
        const kinising::VbReport rep = kinising::vb_fit(traj, gamma, prior, vb);
        sweep_csv.row({lambda, rep.free_energy, static_cast<double>(rep.iterations)});
        if (rep.free_energy < best_f) {
            best_f = rep.free_energy;
            lambda_star = lambda;
            post = rep.posterior;
        }
    }

    const IsingModel fit = posterior_mean_model(post, gamma);
    const std::string model_path = join_path(o.out_dir, "model_est.json");
    kinising::write_model_json(model_path, fit);

    const SpinTrajectory resampled =
        kinising::gillespie_sample(fit, traj.initial_state, traj.t_end, o.seed + 11);
    const kinising::StatsReport st_orig = kinising::trajectory_stats(traj, 2, 0, 0);
    const kinising::StatsReport st_fit = kinising::trajectory_stats(resampled, 2, 0, 0);

    const int n = traj.n_spins;
    const std::string m_path = join_path(o.out_dir, "m_scatter.csv");
    kinising::CsvWriter m_csv(m_path);
    m_csv.header({"i", "m_data", "m_model"});
    for (int i = 0; i < n; ++i) m_csv.row({double(i), st_orig.m[i], st_fit.m[i]});

    const std::string c_path = join_path(o.out_dir, "c2_scatter.csv");
    kinising::CsvWriter c_csv(c_path);
    c_csv.header({"i", "j", "c2_data", "c2_model"});
    std::vector<double> cd, cm;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            c_csv.row({double(i), double(j), st_orig.c2(i, j), st_fit.c2(i, j)});
            cd.push_back(st_orig.c2(i, j));
            cm.push_back(st_fit.c2(i, j));
        }
    const double pearson_m = kinising::pearson(st_orig.m, st_fit.m);
    const double pearson_c2 =
        kinising::pearson(Eigen::Map<const Vec>(cd.data(), cd.size()),
                          Eigen::Map<const Vec>(cm.data(), cm.size()));

    // ground-truth synapses among the kept neurons; self-couplings of the
    // binarized chain have no synaptic counterpart and are excluded
    const Eigen::MatrixXi adj = kinising::lif_synapse_matrix(cfg);
    Eigen::MatrixXi truth(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) truth(i, j) = adj(selected[i], selected[j]);
    std::vector<char> tf;
    std::vector<double> sc;
    coupling_scores(nullptr, &post, true, truth, tf, sc);
    const kinising::RocCurve roc = kinising::roc_auc(tf, sc);
    const std::string roc_path = join_path(o.out_dir, "roc_synapse.csv");
    write_roc_csv(roc_path, roc);

    const std::string summary_path = join_path(o.out_dir, "summary.csv");
    kinising::CsvWriter summary(summary_path);
    summary.header({"lambda_star", "free_energy", "pearson_m", "pearson_c2", "auc_synapse"});
    summary.row({lambda_star, best_f, pearson_m, pearson_c2, roc.auc});
    man.outputs = {traj_path, sweep_path, model_path, m_path,
                   c_path,    roc_path,  summary_path};
}

void cmd_repro(const ReproOpts& o, Manifest& man) {
    if (o.scale != "desk" && o.scale != "paper")
        throw std::invalid_argument("scale must be desk or paper");
    std::filesystem::create_directories(o.out_dir);
    man.path = join_path(o.out_dir, "manifest.json");
    if (o.figure == "fig1")
        repro_fig1(o, man);
    else if (o.figure == "fig2")
        repro_fig2(o, man);
    else if (o.figure == "fig3")
        repro_fig3(o, man);
    else
        throw std::invalid_argument("figure must be fig1, fig2 or fig3");
}

void cmd_rerun(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw std::invalid_argument("cannot open manifest: " + manifest_path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("invalid manifest JSON: ") + e.what());
    }
    if (!j.contains("argv") || !j["argv"].is_array())
        throw std::invalid_argument("manifest has no argv record");
    std::vector<std::string> args;
    for (const auto& a : j["argv"]) args.push_back(a.get<std::string>());
    const int code = run(args);
    if (code != 0) throw std::runtime_error("rerun failed with exit code " + std::to_string(code));
}

// -------------------------------------------------------------------- main

int run(std::vector<std::string> args) {
    CLI::App app{"Continuous-time kinetic Ising sampling, inference and evaluation"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "Worker thread cap (0 = library default)")
        ->envname("KINISING_THREADS");

    Manifest man;
    man.argv = args;
    // commands are dispatched after parsing so that global flags apply first
    std::function<void()> pending;

    GenerateOpts gen;
    CLI::App* c_gen = app.add_subcommand("generate", "Sample a random model and trajectory");
    c_gen->add_option("--n", gen.n, "Number of spins")->capture_default_str();
    c_gen->add_option("--t-end", gen.t_end, "Trajectory length")->capture_default_str();
    c_gen->add_option("--g", gen.g, "Coupling scale, J ~ N(0, g^2/N)")->capture_default_str();
    c_gen->add_option("--gamma", gen.gamma, "Attempt rate per spin")->capture_default_str();
    c_gen->add_option("--p-sparse", gen.p_sparse, "Probability a coupling is zeroed")
        ->capture_default_str();
    c_gen->add_option("--theta-mean", gen.theta_mean, "Field prior mean")->capture_default_str();
    c_gen->add_option("--theta-sd", gen.theta_sd, "Field prior sd (0 = fields zero)")
        ->capture_default_str();
    c_gen->add_option("--seed", gen.seed, "Base seed")->capture_default_str();
    c_gen->add_option("--out-model", gen.out_model, "Model JSON output")->required();
    c_gen->add_option("--out-traj", gen.out_traj, "Trajectory JSON output")->required();
    c_gen->callback([&] { pending = [&] { cmd_generate(gen, man); }; });

    LifSimOpts lif;
    CLI::App* c_lif = app.add_subcommand("lif-sim", "Simulate a LIF network and binarize");
    c_lif->add_option("--t-end", lif.t_end, "Simulated seconds")->capture_default_str();
    c_lif->add_option("--scale", lif.scale, "desk (200/200/50) or paper (800/800/200)")
        ->capture_default_str();
    c_lif->add_option("--seed", lif.seed, "Seed")->capture_default_str();
    c_lif->add_option("--keep-e", lif.keep_e, "Excitatory neurons kept")->capture_default_str();
    c_lif->add_option("--keep-i", lif.keep_i, "Inhibitory neurons kept")->capture_default_str();
    c_lif->add_option("--active-ms", lif.active_ms, "Active window after a spike, ms")
        ->capture_default_str();
    c_lif->add_option("--dt-ms", lif.dt_ms, "Euler step, ms")->capture_default_str();
    c_lif->add_option("--out-spikes", lif.out_spikes, "Spike JSON output")->required();
    c_lif->add_option("--out-traj", lif.out_traj, "Binarized trajectory output")->required();
    c_lif->callback([&] { pending = [&] { cmd_lif_sim(lif, man); }; });

    FitEmOpts fem;
    CLI::App* c_fem = app.add_subcommand("fit-em", "EM coupling inference (plain or L1)");
    c_fem->add_option("--traj", fem.traj, "Trajectory JSON")->required();
    c_fem->add_option("--gamma", fem.gamma, "Attempt rate (default: from trajectory file)");
    c_fem->add_option("--lambda", fem.lambda, "L1 scale, 0 = plain EM")->capture_default_str();
    c_fem->add_option("--tol", fem.tol, "Relative objective tolerance")->capture_default_str();
    c_fem->add_option("--max-iters", fem.max_iters, "Iteration cap")->capture_default_str();
    c_fem->add_option("--out", fem.out, "Estimated model JSON")->required();
    c_fem->add_option("--trace", fem.trace, "Objective trace CSV");
    c_fem->callback([&] { pending = [&] { cmd_fit_em(fem, man); }; });

    FitVbOpts fvb;
    CLI::App* c_fvb = app.add_subcommand("fit-vb", "Variational Bayes inference");
    c_fvb->add_option("--traj", fvb.traj, "Trajectory JSON")->required();
    c_fvb->add_option("--gamma", fvb.gamma, "Attempt rate (default: from trajectory file)");
    c_fvb->add_option("--lambda", fvb.lambda, "Laplace prior scale")->capture_default_str();
    c_fvb->add_option("--mu-theta", fvb.mu_theta, "Field prior mean")->capture_default_str();
    c_fvb->add_option("--lambda-theta", fvb.lambda_theta, "Field prior precision root")
        ->capture_default_str();
    c_fvb->add_option("--tol", fvb.tol, "Relative free-energy tolerance")->capture_default_str();
    c_fvb->add_option("--max-iters", fvb.max_iters, "Iteration cap")->capture_default_str();
    c_fvb->add_option("--out-posterior", fvb.out_posterior, "Posterior JSON")->required();
    c_fvb->add_option("--out-model", fvb.out_model, "Posterior-mean model JSON");
    c_fvb->add_option("--trace", fvb.trace, "Free-energy trace CSV");
    c_fvb->callback([&] { pending = [&] { cmd_fit_vb(fvb, man); }; });

    SweepOpts swp;
    CLI::App* c_swp = app.add_subcommand("sweep-lambda", "Prior-scale grid sweep");
    c_swp->add_option("--traj", swp.traj, "Training trajectory JSON")->required();
    c_swp->add_option("--gamma", swp.gamma, "Attempt rate (default: from trajectory file)");
    c_swp->add_option("--grid", swp.grid, "lo:hi:count[log]")->capture_default_str();
    c_swp->add_option("--method", swp.method, "vb (free energy) or em (held-out loglik)")
        ->capture_default_str();
    c_swp->add_option("--test-traj", swp.test_traj, "Held-out trajectory for --method em");
    c_swp->add_option("--mu-theta", swp.mu_theta, "Field prior mean")->capture_default_str();
    c_swp->add_option("--lambda-theta", swp.lambda_theta, "Field prior precision root")
        ->capture_default_str();
    c_swp->add_option("--tol", swp.tol, "Relative tolerance")->capture_default_str();
    c_swp->add_option("--max-iters", swp.max_iters, "Iteration cap")->capture_default_str();
    c_swp->add_option("--out", swp.out, "Sweep CSV")->required();
    c_swp->callback([&] { pending = [&] { cmd_sweep_lambda(swp, man); }; });

    CLI::App* c_eval = app.add_subcommand("eval", "Evaluation metrics");
    c_eval->require_subcommand(1);

    EvalStatsOpts est;
    CLI::App* c_est = c_eval->add_subcommand("stats", "Trajectory moments");
    c_est->add_option("--traj", est.traj, "Trajectory JSON")->required();
    c_est->add_option("--order", est.order, "Moment order 2..4")->capture_default_str();
    c_est->add_option("--budget", est.budget, "Sampled tuples per higher order")
        ->capture_default_str();
    c_est->add_option("--seed", est.seed, "Tuple subset seed")->capture_default_str();
    c_est->add_option("--out", est.out, "Flattened moments CSV")->required();
    c_est->callback([&] { pending = [&] { cmd_eval_stats(est, man); }; });

    EvalMseOpts ems;
    CLI::App* c_ems = c_eval->add_subcommand("mse", "Coupling mean squared error");
    c_ems->add_option("--true", ems.truth, "Ground-truth model JSON")->required();
    c_ems->add_option("--est", ems.est, "Estimated model JSON")->required();
    c_ems->add_flag("--include-theta", ems.include_theta, "Average fields in as well");
    c_ems->add_option("--out", ems.out, "Single-row CSV");
    c_ems->callback([&] { pending = [&] { cmd_eval_mse(ems, man); }; });

    EvalRocOpts erc;
    CLI::App* c_erc = c_eval->add_subcommand("roc", "Nonzero-coupling classification");
    c_erc->add_option("--true", erc.truth, "Ground-truth model JSON")->required();
    c_erc->add_option("--est", erc.est, "Estimated model JSON (score |J|)");
    c_erc->add_option("--posterior", erc.posterior, "Posterior JSON (score |mu|/sigma)");
    c_erc->add_flag("--exclude-diagonal", erc.exclude_diagonal, "Skip self-couplings");
    c_erc->add_option("--out", erc.out, "ROC curve CSV");
    c_erc->callback([&] { pending = [&] { cmd_eval_roc(erc, man); }; });

    ReproOpts rep;
    CLI::App* c_rep = app.add_subcommand("repro", "Scripted experiment reproductions");
    c_rep->add_option("figure", rep.figure, "fig1, fig2 or fig3")->required();
    c_rep->add_option("--scale", rep.scale, "desk or paper")->capture_default_str();
    c_rep->add_option("--seed", rep.seed, "Base seed")->capture_default_str();
    c_rep->add_option("--out-dir", rep.out_dir, "Artifact directory")->capture_default_str();
    c_rep->callback([&] { pending = [&] { cmd_repro(rep, man); }; });

    std::string rerun_manifest;
    CLI::App* c_rerun = app.add_subcommand("rerun", "Replay a recorded run manifest");
    c_rerun->add_option("--manifest", rerun_manifest, "Manifest JSON")->required();
    bool is_rerun = false;
    c_rerun->callback([&] { is_rerun = true; });

    const auto t0 = std::chrono::steady_clock::now();
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }

    if (threads > 0) {
        Eigen::setNbThreads(threads);
#ifdef _OPENMP
        omp_set_num_threads(threads);
#endif
    }
    if (is_rerun) {
        cmd_rerun(rerun_manifest);
        return 0;
    }
    for (const CLI::App* sub : app.get_subcommands())
        man.subcommand = sub->get_name();
    if (c_eval->parsed())
        for (const CLI::App* sub : c_eval->get_subcommands())
            man.subcommand = "eval " + sub->get_name();
    if (pending) pending();
    collect_flags(&app, man);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(man, wall);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return run(args);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
