#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "swarmlearn/dynamics.hpp"
#include "swarmlearn/landscape.hpp"
#include "swarmlearn/lr_policy.hpp"
#include "swarmlearn/swarm.hpp"

namespace swarmlearn {

/// Everything a particle needs to run, identical in every worker.
struct SwarmSetup {
    std::shared_ptr<const LossLandscape> landscape;
    DynamicsConfig dynamics;
    std::vector<LrPolicy> lr_policies;
    std::vector<std::uint64_t> init_seeds;
    std::vector<std::uint64_t> rng_seeds;

    std::size_t particles() const noexcept { return lr_policies.size(); }
    void validate() const;
};

struct StepRecord {
    std::size_t epoch = 0;
    ParticleId particle = 0;
    Phase phase = Phase::warmup;
    double lr = 0.0;
    double loss_before = 0.0;  // mean training-batch loss over the epoch's SGD pass
    double loss_after = 0.0;   // held-out loss at the published position
    double velocity_norm = 0.0;
    std::uint64_t position_checksum = 0;
};

/// One particle's training loop, split at the epoch barrier: the local phase
/// (SGD pass, evaluation, pBest) produces a Publication; the collaborative
/// phase consumes the whole swarm's publications for that epoch.
class ParticleWorker {
public:
    ParticleWorker(const SwarmSetup& setup, ParticleId id);

    Publication local_phase(std::size_t epoch);
    StepRecord collaborative_phase(std::size_t epoch, const SwarmSnapshot& snapshot);

    const ParticleState& state() const noexcept { return state_; }
    const BestEntry& global_best() const noexcept { return gbest_; }

private:
    const SwarmSetup& setup_;
    ParticleState state_;
    RngStream lr_rng_;
    std::uint32_t train_stream_;
    std::uint32_t probe_stream_;
    BestEntry gbest_;
    Publication last_;
};

/// Receives every epoch's publications and step records in particle order.
class MetricsSink {
public:
    virtual ~MetricsSink() = default;
    virtual void on_epoch(std::size_t epoch, const SwarmSnapshot& snapshot, const std::vector<StepRecord>& steps) = 0;
    /// Called before a numeric error propagates, with the last good positions.
    virtual void on_abort(std::size_t /*epoch*/, const std::vector<Vector>& /*last_good*/) {}
};

class NullSink final : public MetricsSink {
public:
    void on_epoch(std::size_t, const SwarmSnapshot&, const std::vector<StepRecord>&) override {}
};

struct ParticleBest {
    ParticleId particle = 0;
    std::size_t epoch = 0;
    double eval_loss = 0.0;
    double accuracy = 0.0;
    Vector position;
};

struct RunResult {
    std::vector<ParticleBest> best_by_loss;      // per particle
    std::vector<ParticleBest> best_by_accuracy;  // per particle; empty without accuracy
    ParticleBest overall_by_loss;
    std::optional<ParticleBest> overall_by_accuracy;
    std::vector<Vector> final_positions;
    /// FNV-1a over every published position, in (epoch, particle) order.
    std::uint64_t trajectory_checksum = 0;
};

/// Folds per-epoch publications into best-of tables and the trajectory checksum.
class ResultTracker {
public:
    explicit ResultTracker(std::size_t particles);
    void add(const SwarmSnapshot& snapshot);
    RunResult finish(std::vector<Vector> final_positions) const;

private:
    std::vector<ParticleBest> by_loss_;
    std::vector<ParticleBest> by_acc_;
    std::vector<bool> seen_;
    Fnv1a hash_;
};

struct ExecutionOptions {
    std::size_t threads = 1;  // >1 runs each phase's particles concurrently
};

/// Single-process driver with in-memory exchange at each epoch barrier.
RunResult run_training(const SwarmSetup& setup, MetricsSink& sink, const ExecutionOptions& options = {});

/// Transport for the multi-worker driver.
class Exchange {
public:
    virtual ~Exchange() = default;
    /// A publication already stored for (particle, epoch), if any.
    virtual std::optional<Publication> published(ParticleId particle, std::size_t epoch) = 0;
    virtual void publish(const Publication& pub) = 0;
    /// Blocks until every particle's epoch publication is visible.
    virtual SwarmSnapshot barrier(std::size_t epoch) = 0;
};

/// Runs one particle to completion against `exchange`. Epochs that were
/// already published (a restart after a crash) are recomputed and checked
/// bit-for-bit against the stored payloads instead of being republished.
/// Returns the particle's final position.
Vector run_worker(const SwarmSetup& setup, ParticleId id, Exchange& exchange);

}  // namespace swarmlearn
