#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "swarmlearn/dataset.hpp"
#include "swarmlearn/vector_ops.hpp"

namespace swarmlearn {

/// Selects a mini-batch on stochastic landscapes. The high 32 bits name a
/// sample stream, the low 32 bits count steps within it; consecutive counters
/// walk a shuffled permutation without replacement, reshuffling every cycle.
using BatchSeed = std::optional<std::uint64_t>;

constexpr std::uint64_t make_batch_seed(std::uint32_t stream, std::uint32_t counter) noexcept {
    return (static_cast<std::uint64_t>(stream) << 32) | counter;
}

/// A differentiable objective L : R^D -> R.
///
/// Implementations are immutable after construction; every query is a pure
/// function of (p, batch) and may be issued concurrently.
class LossLandscape {
public:
    virtual ~LossLandscape() = default;

    virtual std::string name() const = 0;
    virtual std::size_t dimension() const = 0;
    /// False for mini-batch losses; those require a BatchSeed on every call.
    virtual bool deterministic() const = 0;

    double loss(std::span<const double> p, BatchSeed batch = std::nullopt) const;
    Vector gradient(std::span<const double> p, BatchSeed batch = std::nullopt) const;
    /// Fills `grad` and returns the loss at the same point and batch.
    double loss_and_gradient(std::span<const double> p, BatchSeed batch, std::span<double> grad) const;

    /// Loss used by the best-position ledgers. Stochastic landscapes evaluate
    /// on a fixed held-out set so that the ledgers compare like with like.
    virtual double eval_loss(std::span<const double> p) const;
    /// Held-out accuracy for classifiers, nullopt otherwise.
    virtual std::optional<double> eval_accuracy(std::span<const double> p) const;

    /// Deterministic starting point for a particle with the given init seed.
    virtual Vector initial_position(std::uint64_t seed) const = 0;

protected:
    virtual double compute(std::span<const double> p, BatchSeed batch, std::span<double> grad) const = 0;

    void check_point(std::span<const double> p, const BatchSeed& batch) const;
};

/// scale * sum(x_i^2); scale 0.5 gives the unit-curvature quadratic.
class Sphere final : public LossLandscape {
public:
    Sphere(std::size_t dimension, double scale = 1.0, double init_low = -5.0, double init_high = 5.0);

    std::string name() const override { return "sphere"; }
    std::size_t dimension() const override { return dim_; }
    bool deterministic() const override { return true; }
    Vector initial_position(std::uint64_t seed) const override;

private:
    double compute(std::span<const double> p, BatchSeed, std::span<double> grad) const override;

    std::size_t dim_;
    double scale_, init_low_, init_high_;
};

/// sum_{i<D-1} 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2, minimum 0 at (1,...,1).
class Rosenbrock final : public LossLandscape {
public:
    Rosenbrock(std::size_t dimension, double init_low = -2.0, double init_high = 2.0);

    std::string name() const override { return "rosenbrock"; }
    std::size_t dimension() const override { return dim_; }
    bool deterministic() const override { return true; }
    Vector initial_position(std::uint64_t seed) const override;

private:
    double compute(std::span<const double> p, BatchSeed, std::span<double> grad) const override;

    std::size_t dim_;
    double init_low_, init_high_;
};

/// 10 D + sum(x_i^2 - 10 cos(2 pi x_i)), minimum 0 at the origin.
class Rastrigin final : public LossLandscape {
public:
    Rastrigin(std::size_t dimension, double init_low = -5.12, double init_high = 5.12);

    std::string name() const override { return "rastrigin"; }
    std::size_t dimension() const override { return dim_; }
    bool deterministic() const override { return true; }
    Vector initial_position(std::uint64_t seed) const override;

private:
    double compute(std::span<const double> p, BatchSeed, std::span<double> grad) const override;

    std::size_t dim_;
    double init_low_, init_high_;
};

Vector uniform_box_point(std::size_t dimension, double low, double high, std::uint64_t seed);

struct LandscapeSpec {
    std::string kind = "sphere";  // sphere | rosenbrock | rastrigin | mlp
    std::size_t dimension = 10;   // analytic kinds
    double scale = 1.0;           // sphere only
    std::optional<double> init_low;
    std::optional<double> init_high;

    // mlp only
    std::size_t features = 2;
    std::size_t hidden = 8;
    std::size_t classes = 2;
    std::size_t batch_size = 16;
    DatasetSpec dataset;
};

std::shared_ptr<const LossLandscape> make_landscape(const LandscapeSpec& spec);

}  // namespace swarmlearn
