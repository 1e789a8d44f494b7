#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "swarmlearn/landscape.hpp"
#include "swarmlearn/random.hpp"
#include "swarmlearn/swarm.hpp"

namespace swarmlearn {

enum class Variant { dynamics1, dynamics2, gbest, classic_pso, sgd_only };
enum class Dynamics2Mode { displacement, literal };
enum class RMode { scalar_per_term, per_dimension };
/// `current`: x(t+1) = x(t) + v(t+1). `lagged`: x(t+1) = x(t) + v(t).
enum class PositionUpdate { current, lagged };
enum class Phase { warmup, collaborative };

std::string to_string(Variant v);
std::string to_string(Dynamics2Mode m);
std::string to_string(RMode m);
std::string to_string(PositionUpdate m);
std::string to_string(Phase p);
Variant variant_from_string(const std::string& s);
Dynamics2Mode dynamics2_mode_from_string(const std::string& s);
RMode r_mode_from_string(const std::string& s);
PositionUpdate position_update_from_string(const std::string& s);
Phase phase_from_string(const std::string& s);

struct DynamicsConfig {
    Variant variant = Variant::dynamics1;
    std::size_t k = 3;
    double c1 = 0.0;  // pBest attraction
    double c2 = 0.5;  // nBest attraction
    double c = 0.5;   // dynamics2 / gbest attraction
    double inertia = 0.7;  // classic PSO
    GradientWeightSpec weights;
    std::size_t warmup_epochs = 0;
    std::size_t epochs = 100;
    std::size_t steps_per_epoch = 1;
    Dynamics2Mode dynamics2_mode = Dynamics2Mode::displacement;
    RMode r_mode = RMode::scalar_per_term;
    PositionUpdate position_update = PositionUpdate::current;
    /// Run the SGD pass before the collaborative step. Always on for the
    /// gradient-mixing variants; turning it off makes classic_pso gradient-free.
    bool intermediate_sgd = true;

    void validate(std::size_t particles) const;
    Phase phase_at(std::size_t epoch) const noexcept {
        return epoch < warmup_epochs || variant == Variant::sgd_only ? Phase::warmup : Phase::collaborative;
    }
};

/// What one particle makes visible to its peers at the end of an epoch's
/// local phase: its post-SGD position, the gradient there, and its ledgers.
struct Publication {
    ParticleId particle = 0;
    std::size_t epoch = 0;
    Phase phase = Phase::warmup;
    double lr = 0.0;
    double train_loss = 0.0;
    double eval_loss = 0.0;
    double accuracy = 0.0;  // NaN without a classifier
    Vector position;
    Vector gradient;
    BestEntry pbest;
};

/// One publication per particle, indexed by particle id.
using SwarmSnapshot = std::vector<Publication>;

std::vector<Vector> snapshot_positions(const SwarmSnapshot& snapshot);
PeerTable peer_table(const SwarmSnapshot& snapshot);

/// x <- x - lr * grad L(x) on the selected batch; returns the batch loss.
double sgd_step(ParticleState& p, const LossLandscape& landscape, double lr, BatchSeed batch);

/// Distance-weighted gradient mixing over the k-nearest neighbourhood plus
/// pBest/nBest attraction measured from the intermediate position.
void dynamics1_step(ParticleState& self, const SwarmSnapshot& snapshot, const DynamicsConfig& cfg, UniformSource& rng);

/// Pull-back variant: attraction toward every other particle's
/// gradient-stepped position (displacement mode), or the sum exactly as
/// printed with absolute positions (literal mode), plus nBest attraction.
void dynamics2_step(ParticleState& self, const SwarmSnapshot& snapshot, const DynamicsConfig& cfg, UniformSource& rng);

/// Velocity accumulates attraction toward the global best; no gradient term.
void gbest_step(ParticleState& self, const BestEntry& global_best, const DynamicsConfig& cfg, UniformSource& rng);

/// Inertia PSO with per-dimension r1, r2 toward pBest and the global best.
void classic_pso_step(ParticleState& self, const BestEntry& global_best, const DynamicsConfig& cfg,
                      UniformSource& rng);

}  // namespace swarmlearn
