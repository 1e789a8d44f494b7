#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace swarmlearn {

/// A point in parameter space (or a vector of the same shape: velocity, gradient).
using Vector = std::vector<double>;

double norm(std::span<const double> a);
double distance(std::span<const double> a, std::span<const double> b);
bool all_finite(std::span<const double> a) noexcept;

/// FNV-1a over the little-endian IEEE-754 bytes of every element.
std::uint64_t checksum(std::span<const double> a) noexcept;

class Fnv1a {
public:
    void update(const void* data, std::size_t size) noexcept;
    std::uint64_t digest() const noexcept { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace swarmlearn
