#pragma once

#include "kinising/lif.hpp"
#include "kinising/types.hpp"
#include "kinising/vb.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kinising {

// JSON interchange formats shared by every CLI subcommand. Reads
// validate; trajectory ingestion jitters tied flip times by +1e-9
// before validation (discretized external data may carry exact ties,
// which the continuous-time model rejects).

void write_trajectory_json(const std::string& path, const SpinTrajectory& traj,
                           std::optional<double> gamma);
SpinTrajectory read_trajectory_json(const std::string& path,
                                    std::optional<double>* gamma_out = nullptr);

void write_model_json(const std::string& path, const IsingModel& model);
IsingModel read_model_json(const std::string& path);

void write_posterior_json(const std::string& path, const RowPosteriorSet& post);
RowPosteriorSet read_posterior_json(const std::string& path);

void write_spikes_json(const std::string& path, const SpikeRecord& rec);
SpikeRecord read_spikes_json(const std::string& path);

/// Comma-separated output with a header row, '%.17g' numbers and no
/// locale dependence.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void header(const std::vector<std::string>& names);
    void row(const std::vector<double>& values);

private:
    struct Impl;
    Impl* impl_;
};

std::string format_double(double v);

}  // namespace kinising
