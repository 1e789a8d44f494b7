#include <cmath>

#include "doctest.h"
#include "swarmlearn/errors.hpp"
#include "swarmlearn/landscape.hpp"
#include "swarmlearn/mlp.hpp"

using namespace swarmlearn;

namespace {

// The default tiny classifier: 2-moons, 200/200 samples, noise 0.1, dataset
// seed 7, hidden 8, batch 16.
std::shared_ptr<const MlpClassifier> tiny() {
    LandscapeSpec s;
    s.kind = "mlp";
    return std::dynamic_pointer_cast<const MlpClassifier>(make_landscape(s));
}

Dataset two_points_per_class() {
    Dataset d;
    d.features = 2;
    d.classes = 2;
    d.x = {-1.0, 0.0, 1.0, 0.0, -2.0, 0.5, 2.0, 0.5};
    d.labels = {0, 1, 0, 1};
    return d;
}

}  // namespace

// Expected values below come from tests/reference/reference_mlp.py, a pure
// Python reimplementation of the generator, shuffling and network.
TEST_CASE("dataset and batches match the Python reference") {
    const auto m = tiny();
    const Dataset& train = m->split(Split::train);
    CHECK(train.row(0)[0] == doctest::Approx(0.42131028603868526).epsilon(1e-15));
    CHECK(train.row(0)[1] == doctest::Approx(0.8619732169825406).epsilon(1e-15));
    CHECK(train.labels[0] == 0);
    const std::vector<std::size_t> first{110, 139, 119, 168, 82, 19, 53, 152, 24, 47, 80, 122, 114, 101, 156, 146};
    CHECK(m->batch_indices(make_batch_seed(5, 0)) == first);
}

TEST_CASE("reference SGD run reproduces the scripted accuracy") {
    const auto m = tiny();
    Vector p = m->initial_position(5);
    CHECK(m->accuracy(p, Split::test) == doctest::Approx(0.765));
    CHECK(m->eval_loss(p) == doctest::Approx(0.5680240845014971).epsilon(1e-12));
    for (std::uint32_t t = 0; t < 300; ++t) {
        const Vector g = m->gradient(p, make_batch_seed(5, t));
        for (std::size_t i = 0; i < p.size(); ++i) p[i] -= 0.05 * g[i];
    }
    CHECK(m->accuracy(p, Split::test) == doctest::Approx(0.915));
    CHECK(m->eval_loss(p) == doctest::Approx(0.2494043786447224).epsilon(1e-12));
    CHECK(p.front() == doctest::Approx(0.3527055289425142).epsilon(1e-12));
    CHECK(p.back() == doctest::Approx(0.029480561666699608).epsilon(1e-12));
}

TEST_CASE("accuracy edge cases") {
    const MlpShape shape{2, 1, 2};
    const MlpClassifier m(shape, two_points_per_class(), two_points_per_class(), 2, 1);
    // layout: W1 (1x2), b1, W2 (2x1), b2
    const Vector perfect{10.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0};  // class 1 iff x0 > 0
    CHECK(m.accuracy(perfect, Split::test) == 1.0);
    const Vector constant{0, 0, 0, 0, 0, 1.0, 0.0};
    CHECK(m.accuracy(constant, Split::test) == 0.5);
    const Vector tied(7, 0.0);  // every logit equal: lowest class wins
    CHECK(m.accuracy(tied, Split::test) == 0.5);

    Dataset empty;
    empty.features = 2;
    empty.classes = 2;
    const MlpClassifier none(shape, two_points_per_class(), empty, 2, 1);
    CHECK_THROWS_AS(none.accuracy(perfect, Split::test), UsageError);
}

TEST_CASE("probabilities sum to one") {
    const auto m = tiny();
    const Vector p = m->initial_position(2);
    const auto prob = m->predict_proba(p, m->split(Split::test).row(3));
    CHECK(prob[0] + prob[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("batches walk a permutation without replacement") {
    const auto m = tiny();
    std::vector<int> hits(200, 0);
    for (std::uint32_t c = 0; c < 200 / 16; ++c)
        for (auto i : m->batch_indices(make_batch_seed(3, c))) ++hits[i];
    int seen = 0;
    for (int h : hits) {
        CHECK(h <= 1);
        seen += h;
    }
    CHECK(seen == 192);
}
