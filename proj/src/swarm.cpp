#include "swarmlearn/swarm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "swarmlearn/errors.hpp"

namespace swarmlearn {

ParticleState::ParticleState(ParticleId id_, Vector start, std::uint64_t rng_seed)
    : id(id_), x(std::move(start)), rng(rng_seed) {
    v.assign(x.size(), 0.0);
    psi.assign(x.size(), 0.0);
    phi = x;
}

GradientWeightSpec GradientWeightSpec::uniform(std::size_t n, double off_diagonal, double self, double beta) {
    GradientWeightSpec s;
    s.n = n;
    s.beta = beta;
    s.m.assign(n * n, off_diagonal);
    for (std::size_t i = 0; i < n; ++i) s.at(i, i) = self;
    return s;
}

void GradientWeightSpec::validate() const {
    if (m.size() != n * n) throw ConfigError("weight matrix must be N x N");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be positive");
    for (double w : m)
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("weight matrix entries must be finite and >= 0");
}

double cs_weight(const GradientWeightSpec& spec, ParticleId n, ParticleId l, double dist) {
    if (!(dist >= 0.0)) throw DomainError("distance must be non-negative");
    if (n >= spec.n || l >= spec.n) throw UsageError("particle id outside the weight matrix");
    return spec.at(n, l) / std::pow(1.0 + dist, spec.beta);
}

NeighborSet knn(std::span<const Vector> positions, ParticleId owner, std::size_t k) {
    const std::size_t n = positions.size();
    if (owner >= n) throw UsageError("knn owner id out of range");
    if (k >= n) throw UsageError("knn requires k < N (k=" + std::to_string(k) + ", N=" + std::to_string(n) + ")");
    const auto& origin = positions[owner];

    std::vector<std::pair<double, ParticleId>> others;
    others.reserve(n - 1);
    for (ParticleId i = 0; i < n; ++i) {
        if (i == owner) continue;
        if (positions[i].size() != origin.size()) throw UsageError("positions differ in dimension");
        others.emplace_back(distance(origin, positions[i]), i);
    }
    std::partial_sort(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(k), others.end());

    NeighborSet set{owner, {owner}};
    for (std::size_t i = 0; i < k; ++i) set.members.push_back(others[i].second);
    return set;
}

bool update_pbest(ParticleState& p, double current_loss) {
    if (!(current_loss < p.pbest.loss)) return false;
    p.pbest = {p.x, current_loss};
    return true;
}

namespace {

// Best sample among `ids` (ascending id order within equal loss).
template <typename Ids>
bool adopt_best(BestEntry& best, const Ids& ids, const PeerTable& samples) {
    const PeerSample* winner = nullptr;
    double winner_loss = best.loss;
    ParticleId winner_id = 0;
    for (ParticleId id : ids) {
        auto it = samples.find(id);
        if (it == samples.end())
            throw CoordinationError("no reported loss for particle " + std::to_string(id));
        const double l = it->second.loss;
        if (l < winner_loss || (winner && l == winner_loss && id < winner_id)) {
            winner = &it->second;
            winner_loss = l;
            winner_id = id;
        }
    }
    if (!winner) return false;
    best.position.assign(winner->position.begin(), winner->position.end());
    best.loss = winner_loss;
    return true;
}

}  // namespace

bool update_nbest(ParticleState& p, const NeighborSet& neighbors, const PeerTable& samples) {
    return adopt_best(p.nbest, neighbors.members, samples);
}

bool update_global_best(BestEntry& best, const PeerTable& samples) {
    std::vector<ParticleId> ids;
    ids.reserve(samples.size());
    for (const auto& [id, _] : samples) ids.push_back(id);
    return adopt_best(best, ids, samples);
}

std::vector<double> DistanceMatrix::upper_triangle() const {
    std::vector<double> out;
    out.reserve(n_ * (n_ - (n_ > 0)) / 2);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i + 1; j < n_; ++j) out.push_back((*this)(i, j));
    return out;
}

DistanceMatrix pairwise_distances(std::span<const Vector> positions) {
    const std::size_t n = positions.size();
    DistanceMatrix d(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (positions[i].size() != positions[j].size()) throw UsageError("positions differ in dimension");
            d(i, j) = d(j, i) = distance(positions[i], positions[j]);
        }
    return d;
}

}  // namespace swarmlearn
