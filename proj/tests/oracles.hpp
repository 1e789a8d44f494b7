// Test-only reference implementations, written independently of the library
// code they check. Brute force over cleverness.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "swarmlearn/landscape.hpp"

namespace oracle {

using swarmlearn::Vector;

inline Vector central_difference(const swarmlearn::LossLandscape& land, const Vector& p, swarmlearn::BatchSeed batch,
                                 double h) {
    Vector g(p.size());
    Vector q = p;
    for (std::size_t i = 0; i < p.size(); ++i) {
        q[i] = p[i] + h;
        const double up = land.loss(q, batch);
        q[i] = p[i] - h;
        const double down = land.loss(q, batch);
        q[i] = p[i];
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

/// max_i |a_i - b_i| / max(|b_i|, floor)
inline double max_relative_error(const Vector& a, const Vector& b, double floor) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), floor));
    return worst;
}

inline double naive_distance(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

inline std::vector<std::vector<double>> naive_distances(const std::vector<Vector>& xs) {
    std::vector<std::vector<double>> d(xs.size(), std::vector<double>(xs.size(), 0.0));
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = 0; j < xs.size(); ++j) d[i][j] = naive_distance(xs[i], xs[j]);
    return d;
}

/// Owner first, then the k others with the smallest distance; equal distances
/// ordered by id.
inline std::vector<std::size_t> knn_by_sort(const std::vector<Vector>& xs, std::size_t owner, std::size_t k) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t j = 0; j < xs.size(); ++j)
        if (j != owner) all.emplace_back(naive_distance(xs[owner], xs[j]), j);
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> out{owner};
    for (std::size_t i = 0; i < k; ++i) out.push_back(all[i].second);
    return out;
}

/// Sample median, mean of the middle pair for even sizes.
inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

}  // namespace oracle
