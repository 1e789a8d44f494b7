#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "swarmlearn/landscape.hpp"
#include "swarmlearn/random.hpp"

namespace swarmlearn {

/// Either a fixed rate or a log-uniform range [min, max].
struct RateRule {
    bool random = false;
    double rate = 1e-3;  // fixed
    double min = 1e-5;   // random
    double max = 1e-1;   // random

    static RateRule fixed(double r) { return {false, r, r, r}; }
    static RateRule log_uniform(double lo, double hi) { return {true, 0.0, lo, hi}; }
};

struct LrSegment {
    std::size_t start_epoch = 0;
    RateRule rule;
};

enum class LrKind { fixed, random_loguniform, cluster_warmup };

struct LrPolicy {
    LrKind kind = LrKind::fixed;
    RateRule rule;                   // fixed / random_loguniform
    std::vector<LrSegment> schedule;  // cluster_warmup

    static LrPolicy fixed(double rate);
    static LrPolicy random(double min, double max);
    static LrPolicy cluster_warmup(std::vector<LrSegment> segments);

    bool is_random() const noexcept;
    void validate() const;
};

std::string to_string(LrKind kind);
LrKind lr_kind_from_string(const std::string& s);

/// Learning rate for `epoch`. Random rules draw 10^u, u ~ U[log10 min, log10 max],
/// consuming one variate; fixed rules consume none.
double sample_lr(const LrPolicy& policy, std::size_t epoch, UniformSource& rng);

struct LrScanPoint {
    double lr = 0.0;
    double loss = 0.0;      // +inf when the run diverged
    double accuracy = 0.0;  // NaN on landscapes without an accuracy metric
    bool diverged = false;
};

using LrScanResult = std::vector<LrScanPoint>;

/// `points` rates spaced geometrically over [lr_min, lr_max].
std::vector<double> geometric_rates(double lr_min, double lr_max, std::size_t points);

/// Independent trial per rate: `steps_per_lr` SGD steps from the same
/// seeded start. A trial diverges when any loss or gradient is non-finite or
/// the held-out loss ends above 4x its starting value.
LrScanResult lr_range_scan(const LossLandscape& landscape, double lr_min, double lr_max, std::size_t steps_per_lr,
                           std::size_t points, std::uint64_t seed);

void write_scan_csv(std::ostream& out, const LrScanResult& scan);

/// Advisory checks over the per-particle policies; returns warning strings.
std::vector<std::string> validate_policy_set(std::span<const LrPolicy> policies, std::size_t particles);

}  // namespace swarmlearn
