#include "swarmlearn/trainer.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <string>

#include "swarmlearn/errors.hpp"

namespace swarmlearn {

void SwarmSetup::validate() const {
    if (!landscape) throw ConfigError("no landscape");
    const std::size_t n = particles();
    if (n == 0) throw ConfigError("swarm needs at least one particle");
    if (init_seeds.size() != n || rng_seeds.size() != n)
        throw ConfigError("per-particle seed lists must have one entry per particle");
    for (const auto& p : lr_policies) p.validate();
    dynamics.validate(n);
}

ParticleWorker::ParticleWorker(const SwarmSetup& setup, ParticleId id)
    : setup_(setup),
      state_(id, setup.landscape->initial_position(setup.init_seeds.at(id)), mix_seed(setup.rng_seeds.at(id), 5)),
      lr_rng_(mix_seed(setup.rng_seeds.at(id), 6)),
      train_stream_(static_cast<std::uint32_t>(mix_seed(setup.rng_seeds.at(id), 7))),
      probe_stream_(static_cast<std::uint32_t>(mix_seed(setup.rng_seeds.at(id), 8))) {}

Publication ParticleWorker::local_phase(std::size_t epoch) {
    const auto& cfg = setup_.dynamics;
    const LossLandscape& land = *setup_.landscape;
    const Phase phase = cfg.phase_at(epoch);

    state_.lr = sample_lr(setup_.lr_policies[state_.id], epoch, lr_rng_);

    double train_loss = 0.0;
    if (phase == Phase::warmup || cfg.intermediate_sgd) {
        for (std::size_t s = 0; s < cfg.steps_per_epoch; ++s) {
            const auto counter = static_cast<std::uint32_t>(epoch * cfg.steps_per_epoch + s);
            train_loss += sgd_step(state_, land, state_.lr, make_batch_seed(train_stream_, counter));
        }
        train_loss /= static_cast<double>(cfg.steps_per_epoch);
    } else {
        train_loss = land.loss(state_.x, make_batch_seed(train_stream_, static_cast<std::uint32_t>(epoch)));
    }

    Publication pub;
    pub.particle = state_.id;
    pub.epoch = epoch;
    pub.phase = phase;
    pub.lr = state_.lr;
    pub.train_loss = train_loss;
    pub.position = state_.x;
    pub.gradient = land.gradient(state_.x, make_batch_seed(probe_stream_, static_cast<std::uint32_t>(epoch)));
    pub.eval_loss = land.eval_loss(state_.x);
    pub.accuracy = land.eval_accuracy(state_.x).value_or(std::numeric_limits<double>::quiet_NaN());
    if (!std::isfinite(pub.eval_loss) || !std::isfinite(train_loss) || !all_finite(pub.gradient))
        throw NumericError("non-finite loss or gradient for particle " + std::to_string(state_.id) + " at epoch " +
                           std::to_string(epoch));

    update_pbest(state_, pub.eval_loss);
    pub.pbest = state_.pbest;
    last_ = pub;
    return pub;
}

StepRecord ParticleWorker::collaborative_phase(std::size_t epoch, const SwarmSnapshot& snapshot) {
    const auto& cfg = setup_.dynamics;
    if (snapshot.size() != setup_.particles())
        throw CoordinationError("snapshot for epoch " + std::to_string(epoch) + " is incomplete");
    for (std::size_t i = 0; i < snapshot.size(); ++i)
        if (snapshot[i].particle != i || snapshot[i].epoch != epoch)
            throw CoordinationError("snapshot entry " + std::to_string(i) + " does not belong to epoch " +
                                    std::to_string(epoch));

    const auto positions = snapshot_positions(snapshot);
    const PeerTable table = peer_table(snapshot);
    update_nbest(state_, knn(positions, state_.id, cfg.k), table);
    update_global_best(gbest_, table);

    const Phase phase = cfg.phase_at(epoch);
    if (phase == Phase::collaborative) {
        switch (cfg.variant) {
            case Variant::dynamics1: dynamics1_step(state_, snapshot, cfg, state_.rng); break;
            case Variant::dynamics2: dynamics2_step(state_, snapshot, cfg, state_.rng); break;
            case Variant::gbest: gbest_step(state_, gbest_, cfg, state_.rng); break;
            case Variant::classic_pso: classic_pso_step(state_, gbest_, cfg, state_.rng); break;
            case Variant::sgd_only: break;
        }
    }

    StepRecord rec;
    rec.epoch = epoch;
    rec.particle = state_.id;
    rec.phase = phase;
    rec.lr = last_.lr;
    rec.loss_before = last_.train_loss;
    rec.loss_after = last_.eval_loss;
    rec.velocity_norm = norm(state_.v);
    rec.position_checksum = checksum(last_.position);
    return rec;
}

ResultTracker::ResultTracker(std::size_t particles)
    : by_loss_(particles), by_acc_(particles), seen_(particles, false) {}

void ResultTracker::add(const SwarmSnapshot& snapshot) {
    for (const auto& pub : snapshot) {
        hash_.update(pub.position.data(), pub.position.size() * sizeof(double));
        const auto i = pub.particle;
        ParticleBest entry{i, pub.epoch, pub.eval_loss, pub.accuracy, pub.position};
        if (!seen_[i]) {
            by_loss_[i] = entry;
            by_acc_[i] = entry;
            seen_[i] = true;
            continue;
        }
        if (pub.eval_loss < by_loss_[i].eval_loss) by_loss_[i] = entry;
        if (pub.accuracy > by_acc_[i].accuracy) by_acc_[i] = std::move(entry);
    }
}

RunResult ResultTracker::finish(std::vector<Vector> final_positions) const {
    RunResult r;
    r.best_by_loss = by_loss_;
    r.final_positions = std::move(final_positions);
    r.trajectory_checksum = hash_.digest();
    if (by_loss_.empty()) return r;
    r.overall_by_loss = by_loss_.front();
    for (const auto& b : by_loss_)
        if (b.eval_loss < r.overall_by_loss.eval_loss) r.overall_by_loss = b;
    if (!std::isnan(by_acc_.front().accuracy)) {
        r.best_by_accuracy = by_acc_;
        ParticleBest best = by_acc_.front();
        for (const auto& b : by_acc_)
            if (b.accuracy > best.accuracy) best = b;
        r.overall_by_accuracy = best;
    }
    return r;
}

namespace {

template <typename Fn>
void for_each_particle(std::size_t n, std::size_t threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::future<void>> jobs;
    jobs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) jobs.push_back(std::async(std::launch::async, [&fn, i] { fn(i); }));
    for (auto& j : jobs) j.get();
}

}  // namespace

RunResult run_training(const SwarmSetup& setup, MetricsSink& sink, const ExecutionOptions& options) {
    setup.validate();
    const std::size_t n = setup.particles();
    std::vector<ParticleWorker> workers;
    workers.reserve(n);
    for (ParticleId i = 0; i < n; ++i) workers.emplace_back(setup, i);

    ResultTracker tracker(n);
    std::vector<Vector> last_good(n);
    for (ParticleId i = 0; i < n; ++i) last_good[i] = workers[i].state().x;

    SwarmSnapshot snapshot(n);
    std::vector<StepRecord> steps(n);
    for (std::size_t epoch = 0; epoch < setup.dynamics.epochs; ++epoch) {
        try {
            for_each_particle(n, options.threads, [&](std::size_t i) { snapshot[i] = workers[i].local_phase(epoch); });
            for_each_particle(n, options.threads,
                              [&](std::size_t i) { steps[i] = workers[i].collaborative_phase(epoch, snapshot); });
        } catch (const NumericError&) {
            sink.on_abort(epoch, last_good);
            throw;
        }
        tracker.add(snapshot);
        sink.on_epoch(epoch, snapshot, steps);
        for (ParticleId i = 0; i < n; ++i) last_good[i] = workers[i].state().x;
    }
    return tracker.finish(std::move(last_good));
}

Vector run_worker(const SwarmSetup& setup, ParticleId id, Exchange& exchange) {
    setup.validate();
    if (id >= setup.particles()) throw ConfigError("particle id " + std::to_string(id) + " is outside the swarm");
    ParticleWorker worker(setup, id);
    for (std::size_t epoch = 0; epoch < setup.dynamics.epochs; ++epoch) {
        Publication pub = worker.local_phase(epoch);
        if (auto stored = exchange.published(id, epoch)) {
            if (checksum(stored->position) != checksum(pub.position) ||
                checksum(stored->gradient) != checksum(pub.gradient) ||
                checksum(stored->pbest.position) != checksum(pub.pbest.position))
                throw IntegrityError("replayed epoch " + std::to_string(epoch) + " of particle " + std::to_string(id) +
                                     " differs from the stored publication");
        } else {
            exchange.publish(pub);
        }
        worker.collaborative_phase(epoch, exchange.barrier(epoch));
    }
    return worker.state().x;
}

}  // namespace swarmlearn
