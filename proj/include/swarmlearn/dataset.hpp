#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace swarmlearn {

struct DatasetSpec {
    std::string kind = "moons";  // moons (2 features, 2 classes) | blobs
    std::size_t train_size = 200;
    std::size_t test_size = 200;
    double noise = 0.1;
    double feature_scale = 1.0;
    std::uint64_t seed = 7;
};

enum class Split { train, test };

/// Labelled samples stored row-major.
struct Dataset {
    std::size_t features = 0;
    std::size_t classes = 0;
    std::vector<double> x;
    std::vector<int> labels;

    std::size_t size() const noexcept { return labels.size(); }
    std::span<const double> row(std::size_t i) const { return {x.data() + i * features, features}; }
    std::uint64_t checksum() const noexcept;
    /// Header f0..f{F-1},label; reals with 17 significant digits.
    void write_csv(std::ostream& out) const;
};

/// Generates one split. Labels cycle 0,1,...,C-1 so every split is balanced
/// up to one sample per class.
Dataset make_dataset(const DatasetSpec& spec, std::size_t features, std::size_t classes, Split split);

}  // namespace swarmlearn
