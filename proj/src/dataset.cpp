#include "swarmlearn/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "swarmlearn/errors.hpp"
#include "swarmlearn/random.hpp"
#include "swarmlearn/vector_ops.hpp"

namespace swarmlearn {

std::uint64_t Dataset::checksum() const noexcept {
    Fnv1a h;
    h.update(x.data(), x.size() * sizeof(double));
    h.update(labels.data(), labels.size() * sizeof(int));
    return h.digest();
}

void Dataset::write_csv(std::ostream& out) const {
    for (std::size_t f = 0; f < features; ++f) out << 'f' << f << ',';
    out << "label\n";
    char buf[32];
    for (std::size_t i = 0; i < size(); ++i) {
        for (double v : row(i)) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << buf << ',';
        }
        out << labels[i] << '\n';
    }
}

Dataset make_dataset(const DatasetSpec& spec, std::size_t features, std::size_t classes, Split split) {
    if (features == 0 || classes < 2) throw ConfigError("dataset needs features >= 1 and classes >= 2");
    const bool moons = spec.kind == "moons";
    if (moons && (features != 2 || classes != 2))
        throw ConfigError("moons dataset requires features=2 and classes=2");
    if (!moons && spec.kind != "blobs") throw ConfigError("unknown dataset kind '" + spec.kind + "'");

    Dataset d;
    d.features = features;
    d.classes = classes;
    const std::size_t n = split == Split::train ? spec.train_size : spec.test_size;
    d.x.reserve(n * features);
    d.labels.reserve(n);

    RngStream rng(mix_seed(spec.seed, split == Split::train ? 1 : 2));
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % classes);
        std::vector<double> point(features, 0.0);
        if (moons) {
            const double theta = std::numbers::pi * rng.uniform();
            if (label == 0) {
                point[0] = std::cos(theta);
                point[1] = std::sin(theta);
            } else {
                point[0] = 1.0 - std::cos(theta);
                point[1] = 0.5 - std::sin(theta);
            }
        } else {
            // class centres evenly spaced on a circle of radius 2 in the first two features
            const double angle = 2.0 * std::numbers::pi * label / static_cast<double>(classes);
            point[0] = 2.0 * std::cos(angle);
            if (features > 1) point[1] = 2.0 * std::sin(angle);
        }
        for (double& v : point) v += spec.noise * rng.normal();
        for (double v : point) d.x.push_back(spec.feature_scale * v);
        d.labels.push_back(label);
    }
    return d;
}

}  // namespace swarmlearn
