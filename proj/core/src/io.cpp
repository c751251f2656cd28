#include "kinising/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace kinising {

using nlohmann::json;

namespace {

json load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument("invalid JSON in " + path + ": " + e.what());
    }
    return j;
}

void save(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write file: " + path);
    out << j.dump(2) << '\n';
}

}  // namespace

void write_trajectory_json(const std::string& path, const SpinTrajectory& traj,
                           std::optional<double> gamma) {
    json j;
    j["n_spins"] = traj.n_spins;
    j["t_end"] = traj.t_end;
    j["gamma"] = gamma ? json(*gamma) : json(nullptr);
    j["initial_state"] = std::vector<int>(traj.initial_state.begin(), traj.initial_state.end());
    json flips = json::array();
    for (const auto& f : traj.flips) flips.push_back({{"t", f.t}, {"i", f.spin}});
    j["flips"] = std::move(flips);
    save(path, j);
}

SpinTrajectory read_trajectory_json(const std::string& path, std::optional<double>* gamma_out) {
    const json j = load(path);
    SpinTrajectory traj;
    try {
        traj.n_spins = j.at("n_spins").get<int>();
        traj.t_end = j.at("t_end").get<double>();
        const auto& init = j.at("initial_state");
        traj.initial_state.resize(static_cast<int>(init.size()));
        for (std::size_t k = 0; k < init.size(); ++k)
            traj.initial_state[static_cast<int>(k)] = init[k].get<int>();
        for (const auto& f : j.at("flips"))
            traj.flips.push_back({f.at("t").get<double>(), f.at("i").get<int>()});
        if (gamma_out) {
            const auto& g = j.at("gamma");
            *gamma_out = g.is_null() ? std::nullopt : std::optional<double>(g.get<double>());
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument("trajectory schema violation in " + path + ": " + e.what());
    }
    // jitter exact ties from discretized sources; genuinely decreasing
    // times still fail validation below
    if (!traj.flips.empty()) {
        double last_orig = traj.flips[0].t;
        for (std::size_t k = 1; k < traj.flips.size(); ++k) {
            const double orig = traj.flips[k].t;
            if (orig >= last_orig && traj.flips[k].t <= traj.flips[k - 1].t)
                traj.flips[k].t = traj.flips[k - 1].t + 1e-9;
            last_orig = orig;
        }
    }
    traj.validate();
    return traj;
}

void write_model_json(const std::string& path, const IsingModel& model) {
    const int n = model.n_spins();
    json j;
    j["theta"] = std::vector<double>(model.theta.begin(), model.theta.end());
    json rows = json::array();
    for (int i = 0; i < n; ++i)
        rows.push_back(std::vector<double>(model.J.row(i).begin(), model.J.row(i).end()));
    j["J"] = std::move(rows);
    j["gamma"] = model.gamma;
    save(path, j);
}

IsingModel read_model_json(const std::string& path) {
    const json j = load(path);
    IsingModel m;
    try {
        const auto& theta = j.at("theta");
        const int n = static_cast<int>(theta.size());
        m.theta.resize(n);
        for (int i = 0; i < n; ++i) m.theta[i] = theta[i].get<double>();
        const auto& rows = j.at("J");
        if (static_cast<int>(rows.size()) != n)
            throw std::invalid_argument("model schema violation in " + path + ": J row count");
        m.J.resize(n, n);
        for (int i = 0; i < n; ++i) {
            if (static_cast<int>(rows[i].size()) != n)
                throw std::invalid_argument("model schema violation in " + path + ": J col count");
            for (int k = 0; k < n; ++k) m.J(i, k) = rows[i][k].get<double>();
        }
        m.gamma = j.at("gamma").get<double>();
    } catch (const json::exception& e) {
        throw std::invalid_argument("model schema violation in " + path + ": " + e.what());
    }
    m.validate();
    return m;
}

void write_posterior_json(const std::string& path, const RowPosteriorSet& post) {
    json rows = json::array();
    for (int i = 0; i < post.n_spins(); ++i) {
        json row;
        row["mu"] = std::vector<double>(post.mu[i].begin(), post.mu[i].end());
        json sig = json::array();
        for (Eigen::Index r = 0; r < post.sigma[i].rows(); ++r)
            sig.push_back(std::vector<double>(post.sigma[i].row(r).begin(),
                                              post.sigma[i].row(r).end()));
        row["sigma"] = std::move(sig);
        rows.push_back(std::move(row));
    }
    save(path, json{{"rows", std::move(rows)}});
}

RowPosteriorSet read_posterior_json(const std::string& path) {
    const json j = load(path);
    RowPosteriorSet post;
    try {
        for (const auto& row : j.at("rows")) {
            const auto& mu = row.at("mu");
            const int d = static_cast<int>(mu.size());
            Vec m(d);
            for (int k = 0; k < d; ++k) m[k] = mu[k].get<double>();
            const auto& sig = row.at("sigma");
            Mat s(d, d);
            for (int r = 0; r < d; ++r)
                for (int c = 0; c < d; ++c) s(r, c) = sig[r][c].get<double>();
            post.mu.push_back(std::move(m));
            post.sigma.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument("posterior schema violation in " + path + ": " + e.what());
    }
    return post;
}

void write_spikes_json(const std::string& path, const SpikeRecord& rec) {
    json neurons = json::array();
    for (const auto& nr : rec.neurons)
        neurons.push_back({{"pop", std::string(1, nr.pop)}, {"times", nr.times}});
    save(path, json{{"t_end", rec.t_end}, {"neurons", std::move(neurons)}});
}

SpikeRecord read_spikes_json(const std::string& path) {
    const json j = load(path);
    SpikeRecord rec;
    try {
        rec.t_end = j.at("t_end").get<double>();
        for (const auto& nr : j.at("neurons")) {
            SpikeRecord::Neuron neuron;
            const auto pop = nr.at("pop").get<std::string>();
            if (pop.size() != 1) throw std::invalid_argument("bad population label");
            neuron.pop = pop[0];
            for (const auto& t : nr.at("times")) neuron.times.push_back(t.get<double>());
            rec.neurons.push_back(std::move(neuron));
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument("spikes schema violation in " + path + ": " + e.what());
    }
    return rec;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct CsvWriter::Impl {
    std::ofstream out;
};

CsvWriter::CsvWriter(const std::string& path) : impl_(new Impl) {
    impl_->out.open(path);
    if (!impl_->out) {
        delete impl_;
        throw std::invalid_argument("cannot write file: " + path);
    }
}

CsvWriter::~CsvWriter() { delete impl_; }

void CsvWriter::header(const std::vector<std::string>& names) {
    for (std::size_t k = 0; k < names.size(); ++k)
        impl_->out << (k ? "," : "") << names[k];
    impl_->out << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
    for (std::size_t k = 0; k < values.size(); ++k)
        impl_->out << (k ? "," : "") << format_double(values[k]);
    impl_->out << '\n';
}

}  // namespace kinising
