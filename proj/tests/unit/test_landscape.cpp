#include <cmath>
#include <limits>

#include "doctest.h"
#include "oracles.hpp"
#include "swarmlearn/errors.hpp"
#include "swarmlearn/landscape.hpp"
#include "swarmlearn/mlp.hpp"

using namespace swarmlearn;

namespace {

std::shared_ptr<const LossLandscape> analytic(const std::string& kind, std::size_t dim) {
    LandscapeSpec s;
    s.kind = kind;
    s.dimension = dim;
    return make_landscape(s);
}

}  // namespace

TEST_CASE("known minima") {
    CHECK(analytic("sphere", 3)->loss(Vector{0, 0, 0}) == 0.0);
    CHECK(analytic("rosenbrock", 2)->loss(Vector{1, 1}) == 0.0);
    CHECK(analytic("rastrigin", 4)->loss(Vector(4, 0.0)) == 0.0);
}

TEST_CASE("rastrigin at (0.5, 0.5) matches the scalar script") {
    // tests/reference/reference_mlp.py: 20 + 2 * (0.25 - 10 cos(pi)) = 40.5
    CHECK(analytic("rastrigin", 2)->loss(Vector{0.5, 0.5}) == doctest::Approx(40.5).epsilon(1e-14));
}

TEST_CASE("sphere gradient is 2x at unit scale, x at half scale") {
    CHECK(analytic("sphere", 2)->gradient(Vector{1, 2}) == Vector{2, 4});
    const Sphere half(2, 0.5);
    CHECK(half.gradient(Vector{1, 2}) == Vector{1, 2});
}

TEST_CASE("gradients vanish at stationary points") {
    for (const auto& [kind, at] : {std::pair{"sphere", 0.0}, {"rosenbrock", 1.0}, {"rastrigin", 0.0}}) {
        const auto land = analytic(kind, 5);
        for (double g : land->gradient(Vector(5, at))) CHECK(std::abs(g) <= 1e-12);
    }
}

TEST_CASE("analytic gradients agree with central differences") {
    for (const char* kind : {"sphere", "rosenbrock", "rastrigin"}) {
        const auto land = analytic(kind, 10);
        for (int t = 0; t < 20; ++t) {
            const Vector p = land->initial_position(t);
            const Vector fd = oracle::central_difference(*land, p, {}, 1e-6);
            CHECK(oracle::max_relative_error(land->gradient(p), fd, 1e-8) < 1e-4);
        }
    }
}

TEST_CASE("mlp gradient on a 16-sample batch agrees with central differences") {
    LandscapeSpec s;
    s.kind = "mlp";
    const auto land = make_landscape(s);
    for (std::uint32_t t = 0; t < 5; ++t) {
        const Vector p = land->initial_position(t + 1);
        const auto batch = make_batch_seed(9, t);
        const Vector fd = oracle::central_difference(*land, p, batch, 1e-6);
        CHECK(oracle::max_relative_error(land->gradient(p, batch), fd, 1e-8) < 1e-4);
    }
}

TEST_CASE("loss_and_gradient agrees with the separate calls") {
    LandscapeSpec s;
    s.kind = "mlp";
    const auto land = make_landscape(s);
    const Vector p = land->initial_position(4);
    Vector g(p.size());
    const double l = land->loss_and_gradient(p, make_batch_seed(1, 2), g);
    CHECK(l == land->loss(p, make_batch_seed(1, 2)));
    CHECK(g == land->gradient(p, make_batch_seed(1, 2)));
}

TEST_CASE("input checks") {
    const auto sphere = analytic("sphere", 3);
    CHECK_THROWS_AS(sphere->loss(Vector{1, 2}), UsageError);
    CHECK_THROWS_AS(sphere->loss(Vector{1, std::numeric_limits<double>::quiet_NaN(), 0}), DomainError);
    CHECK_THROWS_AS(sphere->gradient(Vector{1, std::numeric_limits<double>::infinity(), 0}), DomainError);

    LandscapeSpec s;
    s.kind = "mlp";
    const auto mlp = make_landscape(s);
    CHECK_THROWS_AS(mlp->loss(mlp->initial_position(1)), UsageError);  // batch required
}

TEST_CASE("make_landscape") {
    CHECK(analytic("sphere", 10)->dimension() == 10);

    LandscapeSpec s;
    s.kind = "mlp";
    s.hidden = 8;
    s.features = 2;
    s.classes = 2;
    CHECK(make_landscape(s)->dimension() == 42);

    const auto a = std::dynamic_pointer_cast<const MlpClassifier>(make_landscape(s));
    const auto b = std::dynamic_pointer_cast<const MlpClassifier>(make_landscape(s));
    REQUIRE(a);
    CHECK(a->split(Split::train).checksum() == b->split(Split::train).checksum());
    CHECK(a->split(Split::test).checksum() == b->split(Split::test).checksum());
    s.dataset.seed = 8;
    const auto c = std::dynamic_pointer_cast<const MlpClassifier>(make_landscape(s));
    CHECK(a->split(Split::train).checksum() != c->split(Split::train).checksum());

    LandscapeSpec bad;
    bad.kind = "ackley";
    CHECK_THROWS_AS(make_landscape(bad), ConfigError);
    bad.kind = "sphere";
    bad.dimension = 0;
    CHECK_THROWS_AS(make_landscape(bad), ConfigError);
    bad.kind = "rosenbrock";
    bad.dimension = 1;
    CHECK_THROWS_AS(make_landscape(bad), ConfigError);
}

TEST_CASE("initial positions are reproducible and inside the box") {
    const auto land = analytic("rastrigin", 6);
    CHECK(land->initial_position(3) == land->initial_position(3));
    CHECK(land->initial_position(3) != land->initial_position(4));
    for (double x : land->initial_position(3)) {
        CHECK(x >= -5.12);
        CHECK(x <= 5.12);
    }
}
