#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace swarmlearn {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Derives an independent child seed from a base seed and a tag.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t tag) noexcept;

/// Source of Uniform[0,1) variates. Step rules draw through this interface so
/// tests can script the random coefficients.
class UniformSource {
public:
    virtual ~UniformSource() = default;
    virtual double uniform() = 0;
};

/// Seeded stream with a platform-independent output sequence: the engine is
/// mt19937_64 (sequence fixed by the standard) and every variate is derived
/// from raw engine output by hand instead of through <random> distributions.
class RngStream final : public UniformSource {
public:
    explicit RngStream(std::uint64_t seed);

    double uniform() override;
    double normal();
    std::size_t index(std::size_t n);

    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// Returns the same value on every call; used to pin r in hand-evaluated steps.
class ConstantUniform final : public UniformSource {
public:
    explicit ConstantUniform(double value) : value_(value) {}
    double uniform() override { return value_; }

private:
    double value_;
};

}  // namespace swarmlearn
