#include "swarmlearn/dynamics.hpp"

#include <cmath>

#include "swarmlearn/errors.hpp"

namespace swarmlearn {

std::string to_string(Variant v) {
    switch (v) {
        case Variant::dynamics1: return "dynamics1";
        case Variant::dynamics2: return "dynamics2";
        case Variant::gbest: return "gbest";
        case Variant::classic_pso: return "classic_pso";
        case Variant::sgd_only: return "sgd_only";
    }
    return "?";
}

std::string to_string(Dynamics2Mode m) { return m == Dynamics2Mode::displacement ? "displacement" : "literal"; }
std::string to_string(RMode m) { return m == RMode::scalar_per_term ? "scalar_per_term" : "per_dimension"; }
std::string to_string(PositionUpdate m) { return m == PositionUpdate::current ? "current" : "lagged"; }
std::string to_string(Phase p) { return p == Phase::warmup ? "warmup" : "collaborative"; }

Variant variant_from_string(const std::string& s) {
    for (auto v : {Variant::dynamics1, Variant::dynamics2, Variant::gbest, Variant::classic_pso, Variant::sgd_only})
        if (to_string(v) == s) return v;
    throw ConfigError("unknown dynamics variant '" + s + "'");
}

Dynamics2Mode dynamics2_mode_from_string(const std::string& s) {
    if (s == "displacement") return Dynamics2Mode::displacement;
    if (s == "literal") return Dynamics2Mode::literal;
    throw ConfigError("unknown dynamics2_mode '" + s + "'");
}

RMode r_mode_from_string(const std::string& s) {
    if (s == "scalar_per_term") return RMode::scalar_per_term;
    if (s == "per_dimension") return RMode::per_dimension;
    throw ConfigError("unknown r_mode '" + s + "'");
}

PositionUpdate position_update_from_string(const std::string& s) {
    if (s == "current") return PositionUpdate::current;
    if (s == "lagged") return PositionUpdate::lagged;
    throw ConfigError("unknown position_update '" + s + "'");
}

Phase phase_from_string(const std::string& s) {
    if (s == "warmup") return Phase::warmup;
    if (s == "collaborative") return Phase::collaborative;
    throw ConfigError("unknown phase '" + s + "'");
}

void DynamicsConfig::validate(std::size_t particles) const {
    if (particles == 0) throw ConfigError("swarm needs at least one particle");
    if (epochs == 0) throw ConfigError("epochs must be positive");
    if (warmup_epochs > epochs) throw ConfigError("warmup_epochs exceeds epochs");
    if (steps_per_epoch == 0) throw ConfigError("steps_per_epoch must be positive");
    if (k >= particles) throw ConfigError("k must be smaller than the number of particles");
    if (!(c1 >= 0.0) || !(c2 >= 0.0) || !(c >= 0.0)) throw ConfigError("attraction coefficients must be >= 0");
    if (!std::isfinite(inertia)) throw ConfigError("inertia must be finite");
    if (weights.n != particles) throw ConfigError("weight matrix size does not match the number of particles");
    weights.validate();
    if (!intermediate_sgd && variant != Variant::classic_pso)
        throw ConfigError("intermediate_sgd may only be disabled for classic_pso");
}

std::vector<Vector> snapshot_positions(const SwarmSnapshot& snapshot) {
    std::vector<Vector> out;
    out.reserve(snapshot.size());
    for (const auto& p : snapshot) out.push_back(p.position);
    return out;
}

PeerTable peer_table(const SwarmSnapshot& snapshot) {
    PeerTable t;
    for (const auto& p : snapshot) t.emplace(p.particle, PeerSample{p.position, p.eval_loss});
    return t;
}

namespace {

void require_finite(const Vector& v, const ParticleState& p, const char* what) {
    if (!all_finite(v))
        throw NumericError(std::string("non-finite ") + what + " for particle " + std::to_string(p.id));
}

// r coefficients for one attraction term: one scalar, or one per coordinate.
Vector draw_r(UniformSource& rng, RMode mode, std::size_t dim) {
    if (mode == RMode::scalar_per_term) return Vector(1, rng.uniform());
    Vector r(dim);
    for (double& x : r) x = rng.uniform();
    return r;
}

double r_at(const Vector& r, std::size_t i) { return r.size() == 1 ? r[0] : r[i]; }

// Adds coef * r * (target - from) into acc; skipped entirely when coef is zero.
void attract(Vector& acc, double coef, const Vector& r, const BestEntry& target, std::span<const double> from,
             const char* ledger) {
    if (coef == 0.0) return;
    if (target.empty()) throw UsageError(std::string(ledger) + " ledger is empty");
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += coef * r_at(r, i) * (target.position[i] - from[i]);
}

const Publication& entry(const SwarmSnapshot& snapshot, ParticleId id) {
    if (id >= snapshot.size() || snapshot[id].particle != id)
        throw CoordinationError("snapshot has no entry for particle " + std::to_string(id));
    return snapshot[id];
}

}  // namespace

double sgd_step(ParticleState& p, const LossLandscape& landscape, double lr, BatchSeed batch) {
    if (!(lr > 0.0)) throw UsageError("learning rate must be positive");
    Vector g(p.x.size());
    const double loss = landscape.loss_and_gradient(p.x, batch, g);
    require_finite(g, p, "gradient");
    for (std::size_t i = 0; i < p.x.size(); ++i) p.x[i] -= lr * g[i];
    require_finite(p.x, p, "position after SGD");
    return loss;
}

void dynamics1_step(ParticleState& self, const SwarmSnapshot& snapshot, const DynamicsConfig& cfg,
                    UniformSource& rng) {
    const std::size_t dim = self.x.size();
    const auto positions = snapshot_positions(snapshot);
    const NeighborSet hood = knn(positions, self.id, cfg.k);

    auto psi_of = [&](ParticleId l) {
        const Publication& pub = entry(snapshot, l);
        if (pub.gradient.size() != dim) throw CoordinationError("gradient of particle " + std::to_string(l) + " has wrong length");
        Vector psi(dim);
        for (std::size_t i = 0; i < dim; ++i) psi[i] = -pub.lr * pub.gradient[i];
        return psi;
    };

    self.psi = psi_of(self.id);
    for (std::size_t i = 0; i < dim; ++i) self.phi[i] = self.x[i] + self.psi[i];

    Vector v_next(dim, 0.0);
    for (ParticleId l : hood.members) {
        if (l == self.id && cfg.weights.self_mode == SelfWeight::exclude_self) continue;
        const double w = cs_weight(cfg.weights, self.id, l, distance(positions[self.id], positions[l]));
        if (w == 0.0) continue;
        const Vector psi = l == self.id ? self.psi : psi_of(l);
        for (std::size_t i = 0; i < dim; ++i) v_next[i] += w * psi[i];
    }
    const Vector r1 = draw_r(rng, cfg.r_mode, dim);
    const Vector r2 = draw_r(rng, cfg.r_mode, dim);
    attract(v_next, cfg.c1, r1, self.pbest, self.phi, "pbest");
    attract(v_next, cfg.c2, r2, self.nbest, self.phi, "nbest");
    require_finite(v_next, self, "velocity");

    const Vector& applied = cfg.position_update == PositionUpdate::current ? v_next : self.v;
    for (std::size_t i = 0; i < dim; ++i) self.x[i] += applied[i];
    self.v = std::move(v_next);
    require_finite(self.x, self, "position");
}

void dynamics2_step(ParticleState& self, const SwarmSnapshot& snapshot, const DynamicsConfig& cfg,
                    UniformSource& rng) {
    const std::size_t dim = self.x.size();
    Vector delta(dim, 0.0);
    for (ParticleId j = 0; j < snapshot.size(); ++j) {
        if (j == self.id) continue;
        const Publication& pub = entry(snapshot, j);
        const double d = distance(self.x, pub.position);
        const double w = cs_weight(cfg.weights, self.id, j, d * d);
        if (w == 0.0) continue;
        if (cfg.dynamics2_mode == Dynamics2Mode::displacement) {
            for (std::size_t i = 0; i < dim; ++i)
                delta[i] += w * ((pub.position[i] - pub.lr * pub.gradient[i]) - self.x[i]);
        } else {
            for (std::size_t i = 0; i < dim; ++i) delta[i] += w * (pub.position[i] - pub.gradient[i]);
        }
    }
    const Vector r = draw_r(rng, cfg.r_mode, dim);
    attract(delta, cfg.c, r, self.nbest, self.x, "nbest");
    require_finite(delta, self, "displacement");

    for (std::size_t i = 0; i < dim; ++i) self.x[i] += delta[i];
    self.v = std::move(delta);
    require_finite(self.x, self, "position");
}

void gbest_step(ParticleState& self, const BestEntry& global_best, const DynamicsConfig& cfg, UniformSource& rng) {
    const std::size_t dim = self.x.size();
    // The SGD pass has already moved x to the intermediate position.
    self.phi = self.x;
    const Vector r = draw_r(rng, cfg.r_mode, dim);
    Vector v_next = self.v;
    attract(v_next, cfg.c, r, global_best, self.phi, "gbest");
    require_finite(v_next, self, "velocity");
    for (std::size_t i = 0; i < dim; ++i) self.x[i] = self.phi[i] + v_next[i];
    self.v = std::move(v_next);
    require_finite(self.x, self, "position");
}

void classic_pso_step(ParticleState& self, const BestEntry& global_best, const DynamicsConfig& cfg,
                      UniformSource& rng) {
    const std::size_t dim = self.x.size();
    const Vector r1 = draw_r(rng, RMode::per_dimension, dim);
    const Vector r2 = draw_r(rng, RMode::per_dimension, dim);
    Vector v_next(dim);
    for (std::size_t i = 0; i < dim; ++i) v_next[i] = cfg.inertia * self.v[i];
    attract(v_next, cfg.c1, r1, self.pbest, self.x, "pbest");
    attract(v_next, cfg.c2, r2, global_best, self.x, "gbest");
    require_finite(v_next, self, "velocity");
    for (std::size_t i = 0; i < dim; ++i) self.x[i] += v_next[i];
    self.v = std::move(v_next);
    require_finite(self.x, self, "position");
}

}  // namespace swarmlearn
