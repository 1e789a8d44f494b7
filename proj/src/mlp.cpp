#include "swarmlearn/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "swarmlearn/errors.hpp"
#include "swarmlearn/random.hpp"

namespace swarmlearn {

namespace {

// Views into the flattened parameter vector.
struct Params {
    std::span<const double> w1, b1, w2, b2;

    Params(const MlpShape& s, std::span<const double> p) {
        std::size_t o = 0;
        w1 = p.subspan(o, s.hidden * s.features);
        o += w1.size();
        b1 = p.subspan(o, s.hidden);
        o += s.hidden;
        w2 = p.subspan(o, s.classes * s.hidden);
        o += w2.size();
        b2 = p.subspan(o, s.classes);
    }
};

void forward(const MlpShape& s, const Params& w, std::span<const double> input, std::vector<double>& hidden,
             std::vector<double>& logits) {
    for (std::size_t j = 0; j < s.hidden; ++j) {
        double a = w.b1[j];
        for (std::size_t f = 0; f < s.features; ++f) a += w.w1[j * s.features + f] * input[f];
        hidden[j] = std::tanh(a);
    }
    for (std::size_t c = 0; c < s.classes; ++c) {
        double z = w.b2[c];
        for (std::size_t j = 0; j < s.hidden; ++j) z += w.w2[c * s.hidden + j] * hidden[j];
        logits[c] = z;
    }
}

double log_sum_exp(std::span<const double> z) {
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - m);
    return m + std::log(s);
}

}  // namespace

MlpClassifier::MlpClassifier(MlpShape shape, Dataset train, Dataset test, std::size_t batch_size,
                             std::uint64_t shuffle_seed)
    : shape_(shape), train_(std::move(train)), test_(std::move(test)), batch_size_(batch_size),
      shuffle_seed_(shuffle_seed) {
    if (shape_.features == 0 || shape_.hidden == 0 || shape_.classes < 2)
        throw ConfigError("mlp requires features >= 1, hidden >= 1, classes >= 2");
    if (train_.features != shape_.features || test_.features != shape_.features)
        throw ConfigError("dataset feature count does not match the mlp input layer");
    if (batch_size_ == 0) throw ConfigError("batch_size must be positive");
    if (batch_size_ > train_.size()) throw ConfigError("batch_size exceeds the training split");
}

std::vector<std::size_t> MlpClassifier::batch_indices(std::uint64_t batch) const {
    const std::size_t n = train_.size();
    const std::size_t batches_per_cycle = n / batch_size_;
    const auto stream = batch >> 32;
    const auto counter = batch & 0xFFFFFFFFULL;
    const std::uint64_t cycle = counter / batches_per_cycle;
    const std::size_t slot = counter % batches_per_cycle;

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    RngStream rng(mix_seed(mix_seed(shuffle_seed_, stream), cycle));
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.index(i + 1)]);
    return {perm.begin() + static_cast<std::ptrdiff_t>(slot * batch_size_),
            perm.begin() + static_cast<std::ptrdiff_t>((slot + 1) * batch_size_)};
}

double MlpClassifier::mean_loss(std::span<const double> p, const Dataset& data, std::span<const std::size_t> rows,
                                std::span<double> grad) const {
    const MlpShape& s = shape_;
    const Params w(s, p);
    std::vector<double> hidden(s.hidden), logits(s.classes), dz(s.classes);
    const bool want_grad = !grad.empty();
    if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);

    const std::size_t o_b1 = s.hidden * s.features;
    const std::size_t o_w2 = o_b1 + s.hidden;
    const std::size_t o_b2 = o_w2 + s.classes * s.hidden;

    double total = 0.0;
    for (std::size_t r : rows) {
        const auto input = data.row(r);
        const auto label = static_cast<std::size_t>(data.labels[r]);
        forward(s, w, input, hidden, logits);
        const double lse = log_sum_exp(logits);
        total += lse - logits[label];
        if (!want_grad) continue;

        for (std::size_t c = 0; c < s.classes; ++c) dz[c] = std::exp(logits[c] - lse) - (c == label ? 1.0 : 0.0);
        for (std::size_t c = 0; c < s.classes; ++c) {
            grad[o_b2 + c] += dz[c];
            for (std::size_t j = 0; j < s.hidden; ++j) grad[o_w2 + c * s.hidden + j] += dz[c] * hidden[j];
        }
        for (std::size_t j = 0; j < s.hidden; ++j) {
            double back = 0.0;
            for (std::size_t c = 0; c < s.classes; ++c) back += dz[c] * w.w2[c * s.hidden + j];
            const double dh = back * (1.0 - hidden[j] * hidden[j]);
            grad[o_b1 + j] += dh;
            for (std::size_t f = 0; f < s.features; ++f) grad[j * s.features + f] += dh * input[f];
        }
    }
    const auto k = static_cast<double>(rows.size());
    if (want_grad)
        for (double& g : grad) g /= k;
    return total / k;
}

double MlpClassifier::compute(std::span<const double> p, BatchSeed batch, std::span<double> grad) const {
    const auto rows = batch_indices(*batch);
    return mean_loss(p, train_, rows, grad);
}

double MlpClassifier::eval_loss(std::span<const double> p) const {
    check_point(p, std::uint64_t{0});
    if (test_.size() == 0) throw UsageError("test split is empty");
    std::vector<std::size_t> rows(test_.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return mean_loss(p, test_, rows, {});
}

std::optional<double> MlpClassifier::eval_accuracy(std::span<const double> p) const {
    return accuracy(p, Split::test);
}

std::size_t MlpClassifier::predict(std::span<const double> p, std::span<const double> input) const {
    const Params w(shape_, p);
    std::vector<double> hidden(shape_.hidden), logits(shape_.classes);
    forward(shape_, w, input, hidden, logits);
    std::size_t best = 0;
    for (std::size_t c = 1; c < shape_.classes; ++c)
        if (logits[c] > logits[best]) best = c;
    return best;
}

std::vector<double> MlpClassifier::predict_proba(std::span<const double> p, std::span<const double> input) const {
    check_point(p, std::uint64_t{0});
    if (input.size() != shape_.features) throw UsageError("input row has wrong feature count");
    const Params w(shape_, p);
    std::vector<double> hidden(shape_.hidden), logits(shape_.classes);
    forward(shape_, w, input, hidden, logits);
    const double lse = log_sum_exp(logits);
    for (double& z : logits) z = std::exp(z - lse);
    return logits;
}

double MlpClassifier::accuracy(std::span<const double> p, Split which) const {
    check_point(p, std::uint64_t{0});
    const Dataset& data = split(which);
    if (data.size() == 0) throw UsageError("cannot compute accuracy on an empty split");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (predict(p, data.row(i)) == static_cast<std::size_t>(data.labels[i])) ++correct;
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

Vector MlpClassifier::initial_position(std::uint64_t seed) const {
    const MlpShape& s = shape_;
    RngStream rng(mix_seed(seed, 11));
    Vector p(dimension(), 0.0);
    const double s1 = std::sqrt(6.0 / static_cast<double>(s.features + s.hidden));
    for (std::size_t i = 0; i < s.hidden * s.features; ++i) p[i] = -s1 + 2.0 * s1 * rng.uniform();
    const double s2 = std::sqrt(6.0 / static_cast<double>(s.hidden + s.classes));
    const std::size_t o = s.hidden * s.features + s.hidden;
    for (std::size_t i = 0; i < s.classes * s.hidden; ++i) p[o + i] = -s2 + 2.0 * s2 * rng.uniform();
    return p;
}

}  // namespace swarmlearn
