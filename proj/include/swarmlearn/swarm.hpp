#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "swarmlearn/random.hpp"
#include "swarmlearn/vector_ops.hpp"

namespace swarmlearn {

using ParticleId = std::size_t;

/// A best-so-far ledger entry. An empty position means nothing recorded yet.
struct BestEntry {
    Vector position;
    double loss = std::numeric_limits<double>::infinity();

    bool empty() const noexcept { return position.empty(); }
};

struct ParticleState {
    ParticleId id = 0;
    Vector x;    // current position
    Vector v;    // velocity
    Vector psi;  // intermediate velocity of the last collaborative step
    Vector phi;  // intermediate position of the last collaborative step
    BestEntry pbest;
    BestEntry nbest;
    double lr = 0.0;
    RngStream rng{0};  // coefficient draws; owned by this particle only

    ParticleState() = default;
    ParticleState(ParticleId id, Vector start, std::uint64_t rng_seed);
};

enum class SelfWeight { include_self, exclude_self };

/// N x N coupling matrix plus decay exponent for the distance-weighted
/// gradient term: w = M[n][l] / (1 + dist)^beta.
struct GradientWeightSpec {
    std::size_t n = 0;
    std::vector<double> m;  // row-major, m[n * size + l]
    double beta = 1.0;
    SelfWeight self_mode = SelfWeight::include_self;

    /// Every entry set to `off_diagonal` except the diagonal, set to `self`.
    static GradientWeightSpec uniform(std::size_t n, double off_diagonal, double self = 1.0, double beta = 1.0);

    double at(ParticleId row, ParticleId col) const { return m[row * n + col]; }
    double& at(ParticleId row, ParticleId col) { return m[row * n + col]; }
    void validate() const;
};

double cs_weight(const GradientWeightSpec& spec, ParticleId n, ParticleId l, double dist);

struct NeighborSet {
    ParticleId owner = 0;
    std::vector<ParticleId> members;  // owner first, then nearest by ascending distance
};

/// Owner plus its k nearest particles by Euclidean distance; ties go to the
/// lower particle id. Exact O(N D) scan.
NeighborSet knn(std::span<const Vector> positions, ParticleId owner, std::size_t k);

/// Loss and position a peer reported for the current epoch.
struct PeerSample {
    std::span<const double> position;
    double loss = 0.0;
};

using PeerTable = std::map<ParticleId, PeerSample>;

/// Replaces pbest with (x, loss) iff loss is strictly lower. Returns true on change.
bool update_pbest(ParticleState& p, double current_loss);

/// nbest <- argmin over {old nbest} and the neighbors' reported samples.
/// Old entry wins ties, then the lowest id. Returns true on change.
bool update_nbest(ParticleState& p, const NeighborSet& neighbors, const PeerTable& samples);

/// Same argmin rule over every particle; the gBest ledger.
bool update_global_best(BestEntry& best, const PeerTable& samples);

class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(std::size_t n) : n_(n), d_(n * n, 0.0) {}

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return d_[i * n_ + j]; }
    /// Row-major upper triangle (i < j).
    std::vector<double> upper_triangle() const;

private:
    std::size_t n_ = 0;
    std::vector<double> d_;
};

DistanceMatrix pairwise_distances(std::span<const Vector> positions);

}  // namespace swarmlearn
