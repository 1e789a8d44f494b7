#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "swarmlearn/config.hpp"
#include "swarmlearn/lr_policy.hpp"
#include "swarmlearn/trainer.hpp"

namespace swarmlearn {

/// Streams one metrics.csv row per (epoch, particle): the published losses
/// followed by the pairwise distance upper triangle D_i_j for that epoch.
class MetricsCsvSink final : public MetricsSink {
public:
    MetricsCsvSink(std::ostream& out, std::size_t particles);
    void on_epoch(std::size_t epoch, const SwarmSnapshot& snapshot, const std::vector<StepRecord>& steps) override;
    void on_abort(std::size_t epoch, const std::vector<Vector>& last_good) override;

    /// Where on_abort writes last-good positions; unset disables the dump.
    void set_abort_dir(std::filesystem::path dir) { abort_dir_ = std::move(dir); }

private:
    std::ostream& out_;
    std::size_t particles_;
    std::optional<std::filesystem::path> abort_dir_;
};

void write_summary(std::ostream& out, const RunConfig& config, const RunResult& result);

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> board;
    std::optional<std::string> run_id;
};

/// Executes a run and writes metrics.csv, summary.txt and
/// run_config_resolved.json into `out_dir`. Multi-process mode spawns one
/// `worker` subcommand of `worker_exe` per particle.
RunResult run_configured(const RunConfig& config, const std::filesystem::path& out_dir,
                         const std::filesystem::path& worker_exe);

RunResult cmd_run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                  const RunOverrides& overrides, const std::filesystem::path& worker_exe);

/// One particle of a multi-process run, using a board the coordinator has
/// already initialized.
void cmd_worker(const std::filesystem::path& config_path, const std::string& board, const std::string& run_id,
                std::size_t particle);

LrScanResult run_lr_scan(const RunConfig& config);
LrScanResult cmd_lr_scan(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                         std::optional<std::uint64_t> seed_override);

struct CompareEntry {
    std::string label;
    std::vector<double> best_loss;      // one per seed
    std::vector<double> best_accuracy;  // NaN without a classifier
    double median_loss = 0.0;
    double median_accuracy = 0.0;
};

struct CompareResult {
    std::vector<std::uint64_t> seeds;
    std::vector<CompareEntry> entries;
};

/// Runs every config in-process for `seeds` consecutive master seeds starting
/// at `base_seed`. All configs must describe the same landscape.
CompareResult compare_configs(const std::vector<std::pair<std::string, nlohmann::json>>& configs, std::size_t seeds,
                              std::uint64_t base_seed);

CompareResult cmd_compare(const std::vector<std::filesystem::path>& config_paths, std::size_t seeds,
                          const std::filesystem::path& out_dir, std::optional<std::uint64_t> seed_override);

void write_compare(std::ostream& csv, std::ostream& table, const CompareResult& result);

double median(std::vector<double> values);

}  // namespace swarmlearn
