#include "swarmlearn/vector_ops.hpp"

#include <bit>
#include <cmath>
#include <cstring>

namespace swarmlearn {

double norm(std::span<const double> a) {
    double s = 0.0;
    for (double x : a) s += x * x;
    return std::sqrt(s);
}

double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

bool all_finite(std::span<const double> a) noexcept {
    for (double x : a)
        if (!std::isfinite(x)) return false;
    return true;
}

void Fnv1a::update(const void* data, std::size_t size) noexcept {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        state_ ^= p[i];
        state_ *= 0x100000001b3ULL;
    }
}

std::uint64_t checksum(std::span<const double> a) noexcept {
    static_assert(std::endian::native == std::endian::little, "little-endian host expected");
    Fnv1a h;
    h.update(a.data(), a.size_bytes());
    return h.digest();
}

}  // namespace swarmlearn
