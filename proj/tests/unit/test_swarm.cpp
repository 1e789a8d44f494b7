#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "swarmlearn/errors.hpp"
#include "swarmlearn/swarm.hpp"

using namespace swarmlearn;

TEST_CASE("knn small cases") {
    const std::vector<Vector> xs{{0.0}, {1.0}, {3.0}, {-0.5}};
    CHECK(knn(xs, 0, 3).members.size() == 4);
    CHECK(knn(xs, 0, 0).members == std::vector<ParticleId>{0});
    CHECK(knn(xs, 0, 1).members == std::vector<ParticleId>{0, 3});
    CHECK_THROWS_AS(knn(xs, 0, 4), UsageError);

    // equal distances resolve to the lower id
    const std::vector<Vector> tie{{0.0}, {1.0}, {-1.0}};
    CHECK(knn(tie, 0, 1).members == std::vector<ParticleId>{0, 1});
}

TEST_CASE("knn on six random particles matches the exhaustive sort") {
    std::mt19937_64 gen(11);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Vector> xs(6, Vector(4));
        for (auto& x : xs)
            for (auto& v : x) v = z(gen);
        for (ParticleId o = 0; o < 6; ++o) CHECK(knn(xs, o, 2).members == oracle::knn_by_sort(xs, o, 2));
    }
}

TEST_CASE("cs_weight") {
    const auto unit = GradientWeightSpec::uniform(2, 1.0);
    CHECK(cs_weight(unit, 0, 1, 0.0) == 1.0);
    CHECK(cs_weight(unit, 0, 1, 1.0) == 0.5);
    auto s1 = GradientWeightSpec::uniform(4, 1.0);
    s1.at(0, 3) = 10.0;
    CHECK(cs_weight(s1, 0, 3, 3.0) == 2.5);
    CHECK_THROWS_AS(cs_weight(unit, 0, 1, -1e-9), DomainError);

    double prev = INFINITY;
    for (double d = 0.0; d < 50.0; d += 0.37) {
        const double w = cs_weight(s1, 0, 3, d);
        CHECK(w <= prev);
        prev = w;
    }
}

TEST_CASE("weight spec validation") {
    auto w = GradientWeightSpec::uniform(3, 1.0);
    CHECK_NOTHROW(w.validate());
    w.at(1, 2) = -0.1;
    CHECK_THROWS_AS(w.validate(), ConfigError);
    w = GradientWeightSpec::uniform(3, 1.0);
    w.beta = 0.0;
    CHECK_THROWS_AS(w.validate(), ConfigError);
    w = GradientWeightSpec::uniform(3, 1.0);
    w.m.pop_back();
    CHECK_THROWS_AS(w.validate(), ConfigError);
}

TEST_CASE("pbest ledger") {
    ParticleState p(0, {0.0}, 1);
    p.pbest = {{0.0}, 0.5};
    p.x = {1.0};
    CHECK_FALSE(update_pbest(p, 0.5));
    CHECK(p.pbest.position == Vector{0.0});
    CHECK(update_pbest(p, 0.4));
    CHECK(p.pbest.position == Vector{1.0});

    ParticleState q(0, {0.0}, 1);
    std::vector<double> trace;
    for (double loss : {1.0, 0.7, 0.9, 0.6}) {
        update_pbest(q, loss);
        trace.push_back(q.pbest.loss);
    }
    CHECK(trace == std::vector<double>{1.0, 0.7, 0.7, 0.6});
}

TEST_CASE("nbest ledger over three scripted epochs") {
    // particle i sits at 10e + i in epoch e
    const double losses[3][4] = {{0.9, 0.5, 0.7, 0.8}, {0.6, 0.55, 0.4, 0.95}, {0.4, 0.3, 0.45, 0.3}};
    const double expect_loss[3] = {0.5, 0.4, 0.3};
    const double expect_pos[3] = {1.0, 12.0, 21.0};  // epoch 2 tie -> lower id 1

    ParticleState p(0, {0.0}, 1);
    const NeighborSet all{0, {0, 1, 2, 3}};
    for (int e = 0; e < 3; ++e) {
        std::vector<Vector> pos;
        for (int i = 0; i < 4; ++i) pos.push_back({10.0 * e + i});
        PeerTable t;
        for (ParticleId i = 0; i < 4; ++i) t[i] = {pos[i], losses[e][i]};
        update_nbest(p, all, t);
        CHECK(p.nbest.loss == expect_loss[e]);
        CHECK(p.nbest.position == Vector{expect_pos[e]});
    }

    // a later equal loss never displaces the held entry
    const Vector far{99.0};
    PeerTable same{{0, {far, 0.3}}};
    CHECK_FALSE(update_nbest(p, NeighborSet{0, {0}}, same));
    CHECK(p.nbest.position == Vector{21.0});

    // worse neighbours leave it alone; a zero-loss neighbour wins
    PeerTable worse{{0, {far, 1.0}}, {1, {far, 2.0}}};
    CHECK_FALSE(update_nbest(p, NeighborSet{0, {0, 1}}, worse));
    const Vector zero_loss_spot{-3.0};
    PeerTable better{{0, {far, 1.0}}, {1, {zero_loss_spot, 0.0}}};
    CHECK(update_nbest(p, NeighborSet{0, {0, 1}}, better));
    CHECK(p.nbest.position == Vector{-3.0});

    CHECK_THROWS_AS(update_nbest(p, NeighborSet{0, {0, 2}}, better), CoordinationError);
}

TEST_CASE("global best follows the same argmin rule") {
    BestEntry g;
    const Vector a{1.0}, b{2.0};
    CHECK(update_global_best(g, PeerTable{{0, {a, 0.2}}, {1, {b, 0.2}}}));
    CHECK(g.position == a);
    CHECK_FALSE(update_global_best(g, PeerTable{{1, {b, 0.2}}}));
}

TEST_CASE("pairwise distances") {
    const auto same = pairwise_distances(std::vector<Vector>(3, Vector{1.0, 2.0}));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(same(i, j) == 0.0);

    const auto line = pairwise_distances(std::vector<Vector>{{0.0}, {3.0}});
    CHECK(line(0, 1) == 3.0);
    CHECK(line.upper_triangle() == std::vector<double>{3.0});

    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    std::vector<Vector> xs(4, Vector(10));
    for (auto& x : xs)
        for (auto& v : x) v = u(gen);
    const auto d = pairwise_distances(xs);
    const auto o = oracle::naive_distances(xs);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(std::abs(d(i, j) - o[i][j]) <= 1e-12);
            CHECK(d(i, j) == d(j, i));
        }
}
