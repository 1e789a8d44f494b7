// Command-line front end: run, lr-scan, compare, worker.
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "swarmlearn/commands.hpp"
#include "swarmlearn/errors.hpp"

namespace fs = std::filesystem;
using namespace swarmlearn;

namespace {

fs::path self_path(const char* argv0) {
    std::error_code ec;
    fs::path p = fs::read_symlink("/proc/self/exe", ec);
    return ec ? fs::absolute(argv0) : p;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Swarm-coupled SGD training"};
    app.require_subcommand(1);

    std::string config, out = "out", board, run_id;
    std::vector<std::string> configs;
    std::optional<std::uint64_t> seed;
    std::size_t particle = 0, seeds = 10;

    auto* run = app.add_subcommand("run", "train a swarm and write metrics.csv, summary.txt");
    run->add_option("--config", config, "run config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out, "output directory");
    run->add_option("--seed-override", seed, "replace the master seed and re-derive all others");
    run->add_option("--board", board, "scoreboard directory for multi_process mode");
    run->add_option("--run-id", run_id, "run identifier on the board");

    auto* scan = app.add_subcommand("lr-scan", "geometric learning-rate range test");
    scan->add_option("--config", config, "run config (JSON)")->required()->check(CLI::ExistingFile);
    scan->add_option("--out", out, "output directory");
    scan->add_option("--seed-override", seed, "replace the master seed");

    auto* cmp = app.add_subcommand("compare", "run several configs over the same seeds");
    cmp->add_option("--config", configs, "run configs (JSON), repeatable")->required()->check(CLI::ExistingFile);
    cmp->add_option("--seeds", seeds, "number of consecutive master seeds")->check(CLI::PositiveNumber);
    cmp->add_option("--out", out, "output directory");
    cmp->add_option("--seed-override", seed, "first master seed");

    auto* worker = app.add_subcommand("worker", "run one particle against a scoreboard");
    worker->add_option("--config", config, "resolved run config (JSON)")->required()->check(CLI::ExistingFile);
    worker->add_option("--board", board, "scoreboard directory")->required();
    worker->add_option("--run-id", run_id, "run identifier")->required();
    worker->add_option("--particle", particle, "particle id")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_code::ok : exit_code::config;
    }

    try {
        if (*run) {
            RunOverrides ov;
            ov.seed = seed;
            if (!board.empty()) ov.board = board;
            if (!run_id.empty()) ov.run_id = run_id;
            const RunResult r = cmd_run(config, out, ov, self_path(argv[0]));
            std::cout << "best eval loss " << r.overall_by_loss.eval_loss << " (particle " << r.overall_by_loss.particle
                      << ", epoch " << r.overall_by_loss.epoch << ")\n";
        } else if (*scan) {
            const LrScanResult r = cmd_lr_scan(config, out, seed);
            write_scan_csv(std::cout, r);
        } else if (*cmp) {
            std::vector<fs::path> paths(configs.begin(), configs.end());
            cmd_compare(paths, seeds, out, seed);
        } else if (*worker) {
            cmd_worker(config, board, run_id, particle);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return exit_code::ok;
}
