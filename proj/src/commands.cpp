#include "swarmlearn/commands.hpp"

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <cstring>
#include <thread>

#include "swarmlearn/errors.hpp"
#include "swarmlearn/scoreboard.hpp"

extern char** environ;

namespace swarmlearn {

namespace fs = std::filesystem;

namespace {

std::string real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

fs::path final_payload(const fs::path& run_dir, std::size_t particle) {
    return run_dir / "final" / ("p" + std::to_string(particle) + ".vec");
}

// Rethrows a worker's failure as the error class its exit code stands for.
[[noreturn]] void raise_worker_failure(std::size_t particle, int code) {
    const std::string what = "worker " + std::to_string(particle) + " exited with status " + std::to_string(code);
    switch (code) {
        case exit_code::config: throw ConfigError(what);
        case exit_code::numeric: throw NumericError(what);
        case exit_code::coordination: throw CoordinationError(what);
        default: throw Error(what);
    }
}

struct Child {
    pid_t pid = -1;
    std::size_t particle = 0;
    bool done = false;
};

pid_t spawn(const std::vector<std::string>& args) {
    std::vector<char*> argv;
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    pid_t pid = -1;
    if (const int rc = posix_spawn(&pid, argv[0], nullptr, nullptr, argv.data(), environ); rc != 0)
        throw Error("cannot start worker " + args[0] + ": " + std::strerror(rc));
    return pid;
}

int decode_status(int status) {
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return exit_code::failure;
}

RunResult run_multi_process(const RunConfig& cfg, const fs::path& worker_exe, MetricsCsvSink& sink) {
    const std::size_t n = cfg.particles;
    const Scoreboard board(cfg.execution.board, cfg.run_id);
    if (fs::exists(board.run_dir()) && !fs::is_empty(board.run_dir()))
        throw ConfigError("run_id: " + board.run_dir().string() + " already exists on the board");
    board.initialize();
    fs::create_directories(board.run_dir() / "final");
    const fs::path cfg_path = board.run_dir() / "run_config_resolved.json";
    write_json(cfg_path, cfg.to_json());

    std::vector<Child> children;
    try {
        for (std::size_t i = 0; i < n; ++i)
            children.push_back({spawn({worker_exe.string(), "worker", "--config", cfg_path.string(), "--board",
                                       cfg.execution.board, "--run-id", cfg.run_id, "--particle",
                                       std::to_string(i)}),
                                i});
    } catch (...) {
        for (auto& c : children) kill(c.pid, SIGTERM);
        for (auto& c : children) waitpid(c.pid, nullptr, 0);
        throw;
    }

    std::optional<std::pair<std::size_t, int>> failure;
    std::size_t running = n;
    while (running > 0) {
        bool progressed = false;
        for (auto& c : children) {
            if (c.done) continue;
            int status = 0;
            const pid_t r = waitpid(c.pid, &status, WNOHANG);
            if (r == 0) continue;
            c.done = true;
            --running;
            progressed = true;
            const int code = r < 0 ? exit_code::failure : decode_status(status);
            if (code != exit_code::ok && !failure) {
                failure = {c.particle, code};
                for (auto& other : children)
                    if (!other.done) kill(other.pid, SIGTERM);
            }
        }
        if (!progressed && running > 0) std::this_thread::sleep_for(cfg.execution.poll);
    }

    // Rebuild metrics from the board, stopping at the first incomplete epoch.
    ResultTracker tracker(n);
    std::vector<Vector> last_good;
    std::size_t complete = 0;
    for (std::size_t epoch = 0; epoch < cfg.dynamics.epochs; ++epoch) {
        SwarmSnapshot snap;
        for (std::size_t i = 0; i < n; ++i) {
            const auto rec = board.find(i, epoch);
            if (!rec) break;
            snap.push_back(board.load(*rec));
        }
        if (snap.size() != n) break;
        sink.on_epoch(epoch, snap, {});
        tracker.add(snap);
        last_good = snapshot_positions(snap);
        complete = epoch + 1;
    }

    if (failure) {
        if (!last_good.empty()) sink.on_abort(complete - 1, last_good);
        raise_worker_failure(failure->first, failure->second);
    }
    std::vector<Vector> finals;
    for (std::size_t i = 0; i < n; ++i) finals.push_back(read_payload_file(final_payload(board.run_dir(), i)));
    return tracker.finish(std::move(finals));
}

}  // namespace

MetricsCsvSink::MetricsCsvSink(std::ostream& out, std::size_t particles) : out_(out), particles_(particles) {
    out_ << "epoch,particle,phase,lr,train_loss,eval_loss,accuracy";
    for (std::size_t i = 0; i < particles_; ++i)
        for (std::size_t j = i + 1; j < particles_; ++j) out_ << ",D_" << i << '_' << j;
    out_ << '\n';
}

void MetricsCsvSink::on_epoch(std::size_t epoch, const SwarmSnapshot& snapshot, const std::vector<StepRecord>&) {
    const auto dist = pairwise_distances(snapshot_positions(snapshot));
    std::string tail;
    for (double d : dist.upper_triangle()) tail += "," + real(d);
    for (const auto& pub : snapshot) {
        out_ << epoch << ',' << pub.particle << ',' << to_string(pub.phase) << ',' << real(pub.lr) << ','
             << real(pub.train_loss) << ',' << real(pub.eval_loss) << ',' << real(pub.accuracy) << tail << '\n';
    }
    out_.flush();
}

void MetricsCsvSink::on_abort(std::size_t epoch, const std::vector<Vector>& last_good) {
    out_.flush();
    if (!abort_dir_) return;
    const fs::path dir = *abort_dir_ / "last_good";
    fs::create_directories(dir);
    for (std::size_t i = 0; i < last_good.size(); ++i)
        write_payload_file(dir / ("p" + std::to_string(i) + ".vec"), last_good[i]);
    auto note = open_out(dir / "epoch.txt");
    note << epoch << '\n';
}

void write_summary(std::ostream& out, const RunConfig& cfg, const RunResult& r) {
    char sum[17];
    std::snprintf(sum, sizeof sum, "%016llx", static_cast<unsigned long long>(r.trajectory_checksum));
    out << "run_id: " << cfg.run_id << '\n'
        << "landscape: " << cfg.landscape.kind << '\n'
        << "variant: " << to_string(cfg.dynamics.variant);
    if (cfg.dynamics.variant == Variant::dynamics2) out << " (" << to_string(cfg.dynamics.dynamics2_mode) << ')';
    out << '\n'
        << "particles: " << cfg.particles << '\n'
        << "epochs: " << cfg.dynamics.epochs << '\n'
        << "trajectory_checksum: " << sum << "\n\n";

    out << "best by eval loss\nparticle\tepoch\teval_loss\taccuracy\n";
    for (const auto& b : r.best_by_loss)
        out << b.particle << '\t' << b.epoch << '\t' << real(b.eval_loss) << '\t' << real(b.accuracy) << '\n';
    if (!r.best_by_accuracy.empty()) {
        out << "\nbest by accuracy\nparticle\tepoch\teval_loss\taccuracy\n";
        for (const auto& b : r.best_by_accuracy)
            out << b.particle << '\t' << b.epoch << '\t' << real(b.eval_loss) << '\t' << real(b.accuracy) << '\n';
    }
    const auto& bl = r.overall_by_loss;
    out << "\nBest PSO by loss: particle " << bl.particle << " epoch " << bl.epoch << " eval_loss "
        << real(bl.eval_loss) << " accuracy " << real(bl.accuracy) << '\n';
    if (r.overall_by_accuracy) {
        const auto& ba = *r.overall_by_accuracy;
        out << "Best PSO by accuracy: particle " << ba.particle << " epoch " << ba.epoch << " eval_loss "
            << real(ba.eval_loss) << " accuracy " << real(ba.accuracy) << '\n';
    }
}

RunResult run_configured(const RunConfig& cfg, const fs::path& out_dir, const fs::path& worker_exe) {
    fs::create_directories(out_dir);
    write_json(out_dir / "run_config_resolved.json", cfg.to_json());
    for (const auto& w : validate_policy_set(cfg.lr_policies, cfg.particles)) std::cerr << "warning: " << w << '\n';

    auto metrics = open_out(out_dir / "metrics.csv");
    MetricsCsvSink sink(metrics, cfg.particles);
    sink.set_abort_dir(out_dir);

    RunResult result;
    if (cfg.execution.mode == ExecutionMode::multi_process) {
        result = run_multi_process(cfg, worker_exe, sink);
    } else {
        const SwarmSetup setup = cfg.make_setup();
        result = run_training(setup, sink, {cfg.execution.threads});
    }
    auto summary = open_out(out_dir / "summary.txt");
    write_summary(summary, cfg, result);
    return result;
}

RunResult cmd_run(const fs::path& config_path, const fs::path& out_dir, const RunOverrides& ov,
                  const fs::path& worker_exe) {
    RunConfig cfg = RunConfig::load(config_path, ov.seed);
    if (ov.board) cfg.execution.board = *ov.board;
    if (ov.run_id) {
        nlohmann::json j = cfg.to_json();
        j["run_id"] = *ov.run_id;
        cfg = RunConfig::from_json(j);
    }
    return run_configured(cfg, out_dir, worker_exe);
}

void cmd_worker(const fs::path& config_path, const std::string& board_dir, const std::string& run_id,
                std::size_t particle) {
    const RunConfig cfg = RunConfig::load(config_path);
    if (particle >= cfg.particles)
        throw ConfigError("particle: " + std::to_string(particle) + " is out of range for " +
                          std::to_string(cfg.particles) + " particles");
    const SwarmSetup setup = cfg.make_setup();
    const Scoreboard board(board_dir, run_id);
    if (!fs::is_directory(board.run_dir() / "records"))
        throw NotFoundError("board run directory " + board.run_dir().string() + " is not initialized");
    ScoreboardExchange exchange(board, cfg.particles, cfg.execution.timeout, cfg.execution.poll);
    const Vector final_x = run_worker(setup, particle, exchange);
    fs::create_directories(board.run_dir() / "final");
    write_payload_file(final_payload(board.run_dir(), particle), final_x);
}

LrScanResult run_lr_scan(const RunConfig& cfg) {
    const auto landscape = make_landscape(cfg.landscape);
    return lr_range_scan(*landscape, cfg.scan.lr_min, cfg.scan.lr_max, cfg.scan.steps_per_lr, cfg.scan.points,
                         cfg.scan.seed);
}

LrScanResult cmd_lr_scan(const fs::path& config_path, const fs::path& out_dir,
                         std::optional<std::uint64_t> seed_override) {
    const RunConfig cfg = RunConfig::load(config_path, seed_override);
    const LrScanResult scan = run_lr_scan(cfg);
    fs::create_directories(out_dir);
    auto out = open_out(out_dir / "lr_scan.csv");
    write_scan_csv(out, scan);
    return scan;
}

double median(std::vector<double> v) {
    if (v.empty()) throw UsageError("median of an empty set");
    std::sort(v.begin(), v.end(), [](double a, double b) {
        if (std::isnan(a)) return false;
        if (std::isnan(b)) return true;
        return a < b;
    });
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

CompareResult compare_configs(const std::vector<std::pair<std::string, nlohmann::json>>& configs, std::size_t seeds,
                              std::uint64_t base_seed) {
    if (configs.empty()) throw UsageError("compare needs at least one config");
    if (seeds == 0) throw UsageError("compare needs at least one seed");
    CompareResult out;
    for (std::size_t s = 0; s < seeds; ++s) out.seeds.push_back(base_seed + s);

    std::optional<nlohmann::json> landscape;
    for (const auto& [label, j] : configs) {
        CompareEntry entry;
        entry.label = label;
        for (const std::uint64_t seed : out.seeds) {
            const RunConfig cfg = RunConfig::from_json(j, seed);
            if (!landscape)
                landscape = cfg.landscape_json();
            else if (*landscape != cfg.landscape_json())
                throw UsageError("config '" + label + "' describes a different landscape than '" +
                                 configs.front().first + "'");
            double loss = std::numeric_limits<double>::infinity();
            double acc = std::numeric_limits<double>::quiet_NaN();
            try {
                NullSink sink;
                const RunResult r = run_training(cfg.make_setup(), sink, {cfg.execution.threads});
                loss = r.overall_by_loss.eval_loss;
                if (r.overall_by_accuracy) acc = r.overall_by_accuracy->accuracy;
            } catch (const NumericError&) {
                // a diverged seed counts as an infinitely bad result
            }
            entry.best_loss.push_back(loss);
            entry.best_accuracy.push_back(acc);
        }
        entry.median_loss = median(entry.best_loss);
        entry.median_accuracy = median(entry.best_accuracy);
        out.entries.push_back(std::move(entry));
    }
    return out;
}

void write_compare(std::ostream& csv, std::ostream& table, const CompareResult& r) {
    csv << "config,seed,best_loss,best_accuracy\n";
    for (const auto& e : r.entries)
        for (std::size_t s = 0; s < r.seeds.size(); ++s)
            csv << e.label << ',' << r.seeds[s] << ',' << real(e.best_loss[s]) << ',' << real(e.best_accuracy[s])
                << '\n';

    char line[256];
    std::snprintf(line, sizeof line, "%-32s %16s %16s\n", "config", "median_loss", "median_accuracy");
    table << line;
    for (const auto& e : r.entries) {
        std::snprintf(line, sizeof line, "%-32s %16.6g %16.6g\n", e.label.c_str(), e.median_loss,
                      e.median_accuracy);
        table << line;
    }
}

CompareResult cmd_compare(const std::vector<fs::path>& paths, std::size_t seeds, const fs::path& out_dir,
                          std::optional<std::uint64_t> seed_override) {
    std::vector<std::pair<std::string, nlohmann::json>> configs;
    std::uint64_t base = 0;
    for (const auto& p : paths) {
        const RunConfig cfg = RunConfig::load(p);  // validates before any run starts
        if (configs.empty()) base = seed_override.value_or(cfg.seeds.master);
        std::ifstream in(p);
        configs.emplace_back(p.stem().string(), nlohmann::json::parse(in));
    }
    CompareResult r = compare_configs(configs, seeds, base);
    fs::create_directories(out_dir);
    auto csv = open_out(out_dir / "compare.csv");
    std::ostringstream table;
    write_compare(csv, table, r);
    open_out(out_dir / "compare.txt") << table.str();
    std::cout << table.str();
    return r;
}

}  // namespace swarmlearn
