#include "swarmlearn/landscape.hpp"

#include <cmath>
#include <numbers>

#include "swarmlearn/errors.hpp"
#include "swarmlearn/mlp.hpp"
#include "swarmlearn/random.hpp"

namespace swarmlearn {

void LossLandscape::check_point(std::span<const double> p, const BatchSeed& batch) const {
    if (p.size() != dimension())
        throw UsageError("position has " + std::to_string(p.size()) + " coordinates, landscape '" + name() +
                         "' expects " + std::to_string(dimension()));
    if (!all_finite(p)) throw DomainError("position has non-finite coordinates");
    if (!deterministic() && !batch) throw UsageError("landscape '" + name() + "' requires a batch seed");
}

double LossLandscape::loss(std::span<const double> p, BatchSeed batch) const {
    check_point(p, batch);
    return compute(p, batch, {});
}

Vector LossLandscape::gradient(std::span<const double> p, BatchSeed batch) const {
    check_point(p, batch);
    Vector g(dimension(), 0.0);
    compute(p, batch, g);
    return g;
}

double LossLandscape::loss_and_gradient(std::span<const double> p, BatchSeed batch, std::span<double> grad) const {
    check_point(p, batch);
    if (grad.size() != dimension()) throw UsageError("gradient buffer has wrong length");
    return compute(p, batch, grad);
}

double LossLandscape::eval_loss(std::span<const double> p) const { return loss(p); }

std::optional<double> LossLandscape::eval_accuracy(std::span<const double>) const { return std::nullopt; }

Vector uniform_box_point(std::size_t dimension, double low, double high, std::uint64_t seed) {
    RngStream rng(mix_seed(seed, 11));
    Vector x(dimension);
    for (double& v : x) v = low + (high - low) * rng.uniform();
    return x;
}

namespace {

void check_box(double low, double high) {
    if (!(low < high)) throw ConfigError("init box requires init_low < init_high");
}

}  // namespace

Sphere::Sphere(std::size_t dimension, double scale, double init_low, double init_high)
    : dim_(dimension), scale_(scale), init_low_(init_low), init_high_(init_high) {
    if (dim_ == 0) throw ConfigError("sphere dimension must be positive");
    if (!(scale_ > 0.0)) throw ConfigError("sphere scale must be positive");
    check_box(init_low_, init_high_);
}

double Sphere::compute(std::span<const double> p, BatchSeed, std::span<double> grad) const {
    double s = 0.0;
    for (double x : p) s += x * x;
    if (!grad.empty())
        for (std::size_t i = 0; i < dim_; ++i) grad[i] = 2.0 * scale_ * p[i];
    return scale_ * s;
}

Vector Sphere::initial_position(std::uint64_t seed) const {
    return uniform_box_point(dim_, init_low_, init_high_, seed);
}

Rosenbrock::Rosenbrock(std::size_t dimension, double init_low, double init_high)
    : dim_(dimension), init_low_(init_low), init_high_(init_high) {
    if (dim_ < 2) throw ConfigError("rosenbrock dimension must be at least 2");
    check_box(init_low_, init_high_);
}

double Rosenbrock::compute(std::span<const double> p, BatchSeed, std::span<double> grad) const {
    double s = 0.0;
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i + 1 < dim_; ++i) {
        const double a = p[i + 1] - p[i] * p[i];
        const double b = 1.0 - p[i];
        s += 100.0 * a * a + b * b;
        if (!grad.empty()) {
            grad[i] += -400.0 * a * p[i] - 2.0 * b;
            grad[i + 1] += 200.0 * a;
        }
    }
    return s;
}

Vector Rosenbrock::initial_position(std::uint64_t seed) const {
    return uniform_box_point(dim_, init_low_, init_high_, seed);
}

Rastrigin::Rastrigin(std::size_t dimension, double init_low, double init_high)
    : dim_(dimension), init_low_(init_low), init_high_(init_high) {
    if (dim_ == 0) throw ConfigError("rastrigin dimension must be positive");
    check_box(init_low_, init_high_);
}

double Rastrigin::compute(std::span<const double> p, BatchSeed, std::span<double> grad) const {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double s = 10.0 * static_cast<double>(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        s += p[i] * p[i] - 10.0 * std::cos(two_pi * p[i]);
        if (!grad.empty()) grad[i] = 2.0 * p[i] + 10.0 * two_pi * std::sin(two_pi * p[i]);
    }
    return s;
}

Vector Rastrigin::initial_position(std::uint64_t seed) const {
    return uniform_box_point(dim_, init_low_, init_high_, seed);
}

std::shared_ptr<const LossLandscape> make_landscape(const LandscapeSpec& spec) {
    if (spec.kind == "sphere")
        return std::make_shared<Sphere>(spec.dimension, spec.scale, spec.init_low.value_or(-5.0),
                                        spec.init_high.value_or(5.0));
    if (spec.kind == "rosenbrock")
        return std::make_shared<Rosenbrock>(spec.dimension, spec.init_low.value_or(-2.0),
                                            spec.init_high.value_or(2.0));
    if (spec.kind == "rastrigin")
        return std::make_shared<Rastrigin>(spec.dimension, spec.init_low.value_or(-5.12),
                                           spec.init_high.value_or(5.12));
    if (spec.kind == "mlp") {
        if (spec.features == 0 || spec.hidden == 0 || spec.classes < 2)
            throw ConfigError("mlp requires features >= 1, hidden >= 1, classes >= 2");
        MlpShape shape{spec.features, spec.hidden, spec.classes};
        return std::make_shared<MlpClassifier>(shape, make_dataset(spec.dataset, spec.features, spec.classes, Split::train),
                                               make_dataset(spec.dataset, spec.features, spec.classes, Split::test),
                                               spec.batch_size, mix_seed(spec.dataset.seed, 3));
    }
    throw ConfigError("unknown landscape kind '" + spec.kind + "'");
}

}  // namespace swarmlearn
