#include "swarmlearn/lr_policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "swarmlearn/errors.hpp"

namespace swarmlearn {

namespace {

void validate_rule(const RateRule& r) {
    if (r.random) {
        if (!(r.min > 0.0) || !(r.max > 0.0)) throw ConfigError("learning-rate range bounds must be positive");
        if (r.min > r.max) throw ConfigError("learning-rate range has min > max");
    } else if (!(r.rate > 0.0) || !std::isfinite(r.rate)) {
        throw ConfigError("learning rate must be positive");
    }
}

double draw(const RateRule& r, UniformSource& rng) {
    if (!r.random) return r.rate;
    if (r.min == r.max) {
        rng.uniform();  // keep stream consumption independent of the range width
        return r.min;
    }
    const double lo = std::log10(r.min);
    const double hi = std::log10(r.max);
    const double u = lo + (hi - lo) * rng.uniform();
    return std::clamp(std::pow(10.0, u), r.min, r.max);
}

}  // namespace

LrPolicy LrPolicy::fixed(double rate) { return {LrKind::fixed, RateRule::fixed(rate), {}}; }

LrPolicy LrPolicy::random(double min, double max) {
    return {LrKind::random_loguniform, RateRule::log_uniform(min, max), {}};
}

LrPolicy LrPolicy::cluster_warmup(std::vector<LrSegment> segments) {
    return {LrKind::cluster_warmup, {}, std::move(segments)};
}

bool LrPolicy::is_random() const noexcept {
    if (kind != LrKind::cluster_warmup) return rule.random;
    return std::any_of(schedule.begin(), schedule.end(), [](const LrSegment& s) { return s.rule.random; });
}

void LrPolicy::validate() const {
    if (kind != LrKind::cluster_warmup) {
        if ((kind == LrKind::random_loguniform) != rule.random) throw ConfigError("lr policy kind/rule mismatch");
        validate_rule(rule);
        return;
    }
    if (schedule.empty()) throw ConfigError("cluster_warmup schedule is empty");
    if (schedule.front().start_epoch != 0) throw ConfigError("cluster_warmup schedule must start at epoch 0");
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        validate_rule(schedule[i].rule);
        if (i > 0 && schedule[i].start_epoch <= schedule[i - 1].start_epoch)
            throw ConfigError("cluster_warmup start epochs must be strictly increasing");
    }
}

std::string to_string(LrKind kind) {
    switch (kind) {
        case LrKind::fixed: return "fixed";
        case LrKind::random_loguniform: return "random_loguniform";
        case LrKind::cluster_warmup: return "cluster_warmup";
    }
    return "?";
}

LrKind lr_kind_from_string(const std::string& s) {
    if (s == "fixed") return LrKind::fixed;
    if (s == "random_loguniform") return LrKind::random_loguniform;
    if (s == "cluster_warmup") return LrKind::cluster_warmup;
    throw ConfigError("unknown lr policy kind '" + s + "'");
}

double sample_lr(const LrPolicy& policy, std::size_t epoch, UniformSource& rng) {
    policy.validate();
    if (policy.kind != LrKind::cluster_warmup) return draw(policy.rule, rng);
    auto it = std::upper_bound(policy.schedule.begin(), policy.schedule.end(), epoch,
                               [](std::size_t e, const LrSegment& s) { return e < s.start_epoch; });
    return draw(std::prev(it)->rule, rng);
}

std::vector<double> geometric_rates(double lr_min, double lr_max, std::size_t points) {
    if (!(lr_min > 0.0) || !(lr_min < lr_max)) throw UsageError("scan requires 0 < lr_min < lr_max");
    if (points < 2) throw UsageError("scan requires at least 2 points");
    std::vector<double> rates(points);
    const double lo = std::log10(lr_min);
    const double hi = std::log10(lr_max);
    for (std::size_t i = 0; i < points; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(points - 1);
        rates[i] = std::pow(10.0, lo + (hi - lo) * t);
    }
    rates.front() = lr_min;
    rates.back() = lr_max;
    return rates;
}

LrScanResult lr_range_scan(const LossLandscape& landscape, double lr_min, double lr_max, std::size_t steps_per_lr,
                           std::size_t points, std::uint64_t seed) {
    const auto rates = geometric_rates(lr_min, lr_max, points);
    const Vector start = landscape.initial_position(seed);
    const auto stream = static_cast<std::uint32_t>(mix_seed(seed, 7));

    LrScanResult out;
    out.reserve(points);
    for (double lr : rates) {
        Vector x = start;
        Vector g(x.size());
        bool diverged = false;
        const double initial = landscape.eval_loss(x);
        for (std::size_t step = 0; step < steps_per_lr && !diverged; ++step) {
            landscape.loss_and_gradient(x, make_batch_seed(stream, static_cast<std::uint32_t>(step)), g);
            if (!all_finite(g)) {
                diverged = true;
                break;
            }
            for (std::size_t i = 0; i < x.size(); ++i) x[i] -= lr * g[i];
            if (!all_finite(x)) diverged = true;
        }
        LrScanPoint pt{lr, std::numeric_limits<double>::infinity(), std::numeric_limits<double>::quiet_NaN(), true};
        if (!diverged) {
            const double final_loss = landscape.eval_loss(x);
            if (std::isfinite(final_loss) && final_loss <= 4.0 * initial) {
                pt.loss = final_loss;
                pt.diverged = false;
            }
            if (auto acc = landscape.eval_accuracy(x)) pt.accuracy = *acc;
        }
        out.push_back(pt);
    }
    return out;
}

void write_scan_csv(std::ostream& out, const LrScanResult& scan) {
    out << "lr,loss,accuracy\n";
    char buf[128];
    for (const auto& p : scan) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.lr, p.loss, p.accuracy);
        out << buf;
    }
}

std::vector<std::string> validate_policy_set(std::span<const LrPolicy> policies, std::size_t particles) {
    std::vector<std::string> warnings;
    if (policies.size() != particles)
        warnings.push_back("expected " + std::to_string(particles) + " lr policies, got " +
                           std::to_string(policies.size()));
    if (!policies.empty() && std::all_of(policies.begin(), policies.end(), [](const LrPolicy& p) { return p.is_random(); }))
        warnings.push_back("every particle has a random learning rate; no conservative anchor particle");
    auto check_range = [&](const RateRule& r, std::size_t idx) {
        if (r.random && (r.min < 1e-6 || r.max > 1.0))
            warnings.push_back("particle " + std::to_string(idx) + ": random range exceeds [1e-6, 1e0]");
    };
    for (std::size_t i = 0; i < policies.size(); ++i) {
        if (policies[i].kind == LrKind::cluster_warmup) {
            for (const auto& seg : policies[i].schedule) check_range(seg.rule, i);
        } else {
            check_range(policies[i].rule, i);
        }
    }
    return warnings;
}

}  // namespace swarmlearn
