#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "swarmlearn/dataset.hpp"
#include "swarmlearn/landscape.hpp"

namespace swarmlearn {

struct MlpShape {
    std::size_t features = 2;
    std::size_t hidden = 8;
    std::size_t classes = 2;

    /// Flattened parameter count: W1 (hidden x features), b1, W2 (classes x hidden), b2.
    std::size_t parameter_count() const noexcept { return hidden * features + hidden + classes * hidden + classes; }
};

/// One-hidden-layer classifier: tanh hidden units, softmax output, mean
/// cross-entropy over a mini-batch. The held-out loss and accuracy use the
/// full test split.
class MlpClassifier final : public LossLandscape {
public:
    MlpClassifier(MlpShape shape, Dataset train, Dataset test, std::size_t batch_size, std::uint64_t shuffle_seed);

    std::string name() const override { return "mlp"; }
    std::size_t dimension() const override { return shape_.parameter_count(); }
    bool deterministic() const override { return false; }

    double eval_loss(std::span<const double> p) const override;
    std::optional<double> eval_accuracy(std::span<const double> p) const override;
    /// Glorot-uniform weights, zero biases.
    Vector initial_position(std::uint64_t seed) const override;

    /// Fraction of argmax-correct predictions; ties go to the lowest class index.
    double accuracy(std::span<const double> p, Split split) const;
    /// Class probabilities for one input row.
    std::vector<double> predict_proba(std::span<const double> p, std::span<const double> input) const;

    /// Sample indices of the training batch selected by `batch`.
    std::vector<std::size_t> batch_indices(std::uint64_t batch) const;

    const MlpShape& shape() const noexcept { return shape_; }
    const Dataset& split(Split s) const noexcept { return s == Split::train ? train_ : test_; }
    std::size_t batch_size() const noexcept { return batch_size_; }

private:
    double compute(std::span<const double> p, BatchSeed batch, std::span<double> grad) const override;
    double mean_loss(std::span<const double> p, const Dataset& data, std::span<const std::size_t> rows,
                     std::span<double> grad) const;
    std::size_t predict(std::span<const double> p, std::span<const double> input) const;

    MlpShape shape_;
    Dataset train_;
    Dataset test_;
    std::size_t batch_size_;
    std::uint64_t shuffle_seed_;
};

}  // namespace swarmlearn
