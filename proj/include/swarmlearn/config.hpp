#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "swarmlearn/dynamics.hpp"
#include "swarmlearn/landscape.hpp"
#include "swarmlearn/lr_policy.hpp"
#include "swarmlearn/trainer.hpp"

namespace swarmlearn {

enum class ExecutionMode { in_process, multi_process };

struct ExecutionConfig {
    ExecutionMode mode = ExecutionMode::in_process;
    std::string board = "board";
    std::chrono::milliseconds timeout{120000};
    std::chrono::milliseconds poll{50};
    std::size_t threads = 1;
};

struct ScanConfig {
    double lr_min = 1e-5;
    double lr_max = 1e-1;
    std::size_t points = 9;
    std::size_t steps_per_lr = 200;
    std::uint64_t seed = 0;
};

struct SeedConfig {
    std::uint64_t master = 1;
    std::uint64_t dataset = 0;
    std::vector<std::uint64_t> init;
    std::vector<std::uint64_t> rng;
};

/// A fully resolved run description. Sections: landscape, swarm, lr,
/// dynamics, seeds, execution, scan. Every default is materialized by
/// to_json() so the resolved file alone reproduces the run.
struct RunConfig {
    std::string run_id = "run";
    LandscapeSpec landscape;
    std::size_t particles = 4;
    std::vector<LrPolicy> lr_policies;
    DynamicsConfig dynamics;
    SeedConfig seeds;
    ExecutionConfig execution;
    ScanConfig scan;

    /// Parses and validates. With `seed_override`, the master seed is replaced
    /// and every derived seed (dataset, init, rng, scan) is re-derived from it.
    static RunConfig from_json(const nlohmann::json& j, std::optional<std::uint64_t> seed_override = std::nullopt);
    static RunConfig load(const std::filesystem::path& path,
                          std::optional<std::uint64_t> seed_override = std::nullopt);

    nlohmann::json to_json() const;
    nlohmann::json landscape_json() const;
    SwarmSetup make_setup() const;
};

}  // namespace swarmlearn
