#include "swarmlearn/config.hpp"

#include <fstream>
#include <set>

#include "swarmlearn/errors.hpp"
#include "swarmlearn/random.hpp"

namespace swarmlearn {

using nlohmann::json;

namespace {

constexpr std::uint64_t kDatasetTag = 101;
constexpr std::uint64_t kScanTag = 102;
constexpr std::uint64_t kInitTagBase = 1000;
constexpr std::uint64_t kRngTagBase = 2000;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

// Reads one JSON object, rejecting keys it was never asked about so typos
// surface instead of silently falling back to defaults.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
    }

    bool has(const std::string& key) {
        known_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json& raw(const std::string& key) {
        known_.insert(key);
        if (!j_.contains(key)) fail(where(key), "missing");
        return j_.at(key);
    }

    double real(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number()) fail(where(key), "expected a number");
        return v.get<double>();
    }

    std::uint64_t uint(const std::string& key, std::uint64_t fallback) {
        if (!has(key)) return fallback;
        return as_uint(j_.at(key), where(key));
    }

    std::size_t size(const std::string& key, std::size_t fallback) {
        return static_cast<std::size_t>(uint(key, fallback));
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_boolean()) fail(where(key), "expected true or false");
        return v.get<bool>();
    }

    std::string text(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_string()) fail(where(key), "expected a string");
        return v.get<std::string>();
    }

    template <class F>
    auto choice(const std::string& key, const std::string& fallback, F parse) {
        const std::string s = text(key, fallback);
        try {
            return parse(s);
        } catch (const std::exception&) {
            fail(where(key), "unrecognized value '" + s + "'");
        }
    }

    void finish() const {
        for (const auto& [k, _] : j_.items())
            if (!known_.count(k)) fail(where(k), "unknown key");
    }

    static std::uint64_t as_uint(const json& v, const std::string& path) {
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer()) {
            if (v.get<std::int64_t>() < 0) fail(path, "must be non-negative");
            return static_cast<std::uint64_t>(v.get<std::int64_t>());
        }
        fail(path, "expected a non-negative integer");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> known_;
};

std::vector<std::uint64_t> uint_list(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array");
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(Section::as_uint(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

RateRule parse_rule(Section& s) {
    if (s.has("rate")) {
        if (s.has("min") || s.has("max")) fail(s.where("rate"), "give either rate or min/max, not both");
        return RateRule::fixed(s.real("rate", 0.0));
    }
    if (!s.has("min") || !s.has("max")) fail(s.where("rate"), "missing (or give min and max)");
    return RateRule::log_uniform(s.real("min", 0.0), s.real("max", 0.0));
}

LrPolicy parse_policy(const json& j, const std::string& path) {
    Section s(j, path);
    const LrKind kind = s.choice("kind", "fixed", lr_kind_from_string);
    LrPolicy p;
    p.kind = kind;
    if (kind == LrKind::cluster_warmup) {
        const json& segs = s.raw("schedule");
        if (!segs.is_array() || segs.empty()) fail(s.where("schedule"), "expected a non-empty array");
        for (std::size_t i = 0; i < segs.size(); ++i) {
            Section seg(segs[i], s.where("schedule") + "[" + std::to_string(i) + "]");
            LrSegment entry;
            entry.start_epoch = seg.size("start_epoch", 0);
            entry.rule = parse_rule(seg);
            seg.finish();
            p.schedule.push_back(entry);
        }
    } else {
        p.rule = parse_rule(s);
        if (kind == LrKind::fixed && p.rule.random) fail(s.where("rate"), "fixed policy needs a rate");
        if (kind == LrKind::random_loguniform && !p.rule.random) fail(s.where("min"), "random policy needs min and max");
    }
    s.finish();
    try {
        p.validate();
    } catch (const std::exception& e) {
        fail(path, e.what());
    }
    return p;
}

json rule_json(const RateRule& r) {
    if (r.random) return {{"min", r.min}, {"max", r.max}};
    return {{"rate", r.rate}};
}

json policy_json(const LrPolicy& p) {
    json j = {{"kind", to_string(p.kind)}};
    if (p.kind == LrKind::cluster_warmup) {
        json segs = json::array();
        for (const auto& seg : p.schedule) {
            json s = rule_json(seg.rule);
            s["start_epoch"] = seg.start_epoch;
            segs.push_back(s);
        }
        j["schedule"] = segs;
    } else {
        j.update(rule_json(p.rule));
    }
    return j;
}

GradientWeightSpec parse_weights(Section& s, std::size_t n) {
    GradientWeightSpec w;
    const double beta = s.real("beta", 1.0);
    const SelfWeight self_mode = s.choice("self_weight", "include_self", [](const std::string& v) {
        if (v == "include_self") return SelfWeight::include_self;
        if (v == "exclude_self") return SelfWeight::exclude_self;
        throw std::invalid_argument(v);
    });
    if (s.has("matrix")) {
        if (s.has("uniform")) fail(s.where("matrix"), "give either matrix or uniform, not both");
        const json& rows = s.raw("matrix");
        const std::string path = s.where("matrix");
        if (!rows.is_array() || rows.size() != n)
            fail(path, "expected " + std::to_string(n) + " rows, one per particle");
        w.n = n;
        w.m.assign(n * n, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            const std::string rp = path + "[" + std::to_string(r) + "]";
            if (!rows[r].is_array() || rows[r].size() != n) fail(rp, "expected " + std::to_string(n) + " entries");
            for (std::size_t c = 0; c < n; ++c) {
                if (!rows[r][c].is_number()) fail(rp + "[" + std::to_string(c) + "]", "expected a number");
                w.at(r, c) = rows[r][c].get<double>();
            }
        }
    } else {
        const double off = s.real("uniform", 1.0);
        const double self = s.real("self", 1.0);
        w = GradientWeightSpec::uniform(n, off, self);
    }
    w.beta = beta;
    w.self_mode = self_mode;
    try {
        w.validate();
    } catch (const std::exception& e) {
        fail(s.where("matrix"), e.what());
    }
    return w;
}

}  // namespace

RunConfig RunConfig::from_json(const json& j, std::optional<std::uint64_t> seed_override) {
    Section root(j, "");
    RunConfig cfg;
    cfg.run_id = root.text("run_id", cfg.run_id);

    {
        Section s(root.raw("landscape"), "landscape");
        LandscapeSpec& l = cfg.landscape;
        l.kind = s.text("kind", l.kind);
        if (l.kind == "mlp") {
            l.features = s.size("features", l.features);
            l.hidden = s.size("hidden", l.hidden);
            l.classes = s.size("classes", l.classes);
            l.batch_size = s.size("batch_size", l.batch_size);
            DatasetSpec& d = l.dataset;
            if (s.has("dataset")) {
                Section ds(s.raw("dataset"), "landscape.dataset");
                d.kind = ds.text("kind", d.kind);
                d.train_size = ds.size("train_size", d.train_size);
                d.test_size = ds.size("test_size", d.test_size);
                d.noise = ds.real("noise", d.noise);
                d.feature_scale = ds.real("feature_scale", d.feature_scale);
                ds.finish();
            }
        } else if (l.kind == "sphere" || l.kind == "rosenbrock" || l.kind == "rastrigin") {
            l.dimension = s.size("dimension", l.dimension);
            if (l.kind == "sphere") l.scale = s.real("scale", l.scale);
            if (s.has("init_low")) l.init_low = s.real("init_low", 0.0);
            if (s.has("init_high")) l.init_high = s.real("init_high", 0.0);
        } else {
            fail("landscape.kind", "unrecognized value '" + l.kind + "'");
        }
        s.finish();
    }

    {
        Section s(root.raw("swarm"), "swarm");
        cfg.particles = s.size("particles", cfg.particles);
        if (cfg.particles == 0) fail("swarm.particles", "must be at least 1");
        s.finish();
    }
    const std::size_t n = cfg.particles;

    {
        Section s(root.raw("lr"), "lr");
        const json& list = s.raw("policies");
        if (!list.is_array()) fail("lr.policies", "expected an array");
        if (list.size() != n)
            fail("lr.policies", "expected " + std::to_string(n) + " entries, one per particle, got " +
                                    std::to_string(list.size()));
        for (std::size_t i = 0; i < n; ++i)
            cfg.lr_policies.push_back(parse_policy(list[i], "lr.policies[" + std::to_string(i) + "]"));
        s.finish();
    }

    {
        Section s(root.raw("dynamics"), "dynamics");
        DynamicsConfig& d = cfg.dynamics;
        d.variant = s.choice("variant", to_string(d.variant), variant_from_string);
        d.k = s.size("k", d.k);
        d.c1 = s.real("c1", d.c1);
        d.c2 = s.real("c2", d.c2);
        d.c = s.real("c", d.c);
        d.inertia = s.real("inertia", d.inertia);
        d.warmup_epochs = s.size("warmup_epochs", d.warmup_epochs);
        d.epochs = s.size("epochs", d.epochs);
        d.steps_per_epoch = s.size("steps_per_epoch", d.steps_per_epoch);
        d.dynamics2_mode = s.choice("dynamics2_mode", to_string(d.dynamics2_mode), dynamics2_mode_from_string);
        d.r_mode = s.choice("r_mode", to_string(d.r_mode), r_mode_from_string);
        d.position_update = s.choice("position_update", to_string(d.position_update), position_update_from_string);
        d.intermediate_sgd = s.boolean("intermediate_sgd", d.intermediate_sgd);
        if (s.has("weights")) {
            Section w(s.raw("weights"), "dynamics.weights");
            d.weights = parse_weights(w, n);
            w.finish();
        } else {
            d.weights = GradientWeightSpec::uniform(n, 1.0);
        }
        s.finish();
        try {
            d.validate(n);
        } catch (const std::exception& e) {
            fail("dynamics", e.what());
        }
    }

    {
        SeedConfig& sd = cfg.seeds;
        std::optional<std::uint64_t> dataset, scan;
        std::vector<std::uint64_t> init, rng;
        if (root.has("seeds")) {
            Section s(root.raw("seeds"), "seeds");
            sd.master = s.uint("master", sd.master);
            if (s.has("dataset")) dataset = s.uint("dataset", 0);
            if (s.has("init")) init = uint_list(s.raw("init"), "seeds.init");
            if (s.has("rng")) rng = uint_list(s.raw("rng"), "seeds.rng");
            s.finish();
        }
        if (seed_override) {
            sd.master = *seed_override;
            dataset.reset();
            init.clear();
            rng.clear();
        }
        if (!init.empty() && init.size() != n) fail("seeds.init", "expected " + std::to_string(n) + " entries");
        if (!rng.empty() && rng.size() != n) fail("seeds.rng", "expected " + std::to_string(n) + " entries");
        sd.dataset = dataset.value_or(mix_seed(sd.master, kDatasetTag));
        for (std::size_t i = 0; i < n; ++i) {
            sd.init.push_back(init.empty() ? mix_seed(sd.master, kInitTagBase + i) : init[i]);
            sd.rng.push_back(rng.empty() ? mix_seed(sd.master, kRngTagBase + i) : rng[i]);
        }
        cfg.landscape.dataset.seed = sd.dataset;

        cfg.scan.seed = mix_seed(sd.master, kScanTag);
        if (root.has("scan")) {
            Section s(root.raw("scan"), "scan");
            cfg.scan.lr_min = s.real("lr_min", cfg.scan.lr_min);
            cfg.scan.lr_max = s.real("lr_max", cfg.scan.lr_max);
            cfg.scan.points = s.size("points", cfg.scan.points);
            cfg.scan.steps_per_lr = s.size("steps_per_lr", cfg.scan.steps_per_lr);
            if (s.has("seed")) scan = s.uint("seed", 0);
            s.finish();
        }
        if (scan && !seed_override) cfg.scan.seed = *scan;
        if (!(cfg.scan.lr_min > 0.0) || !(cfg.scan.lr_max > cfg.scan.lr_min))
            fail("scan.lr_min", "need 0 < lr_min < lr_max");
        if (cfg.scan.points < 2) fail("scan.points", "must be at least 2");
    }

    if (root.has("execution")) {
        Section s(root.raw("execution"), "execution");
        ExecutionConfig& e = cfg.execution;
        e.mode = s.choice("mode", "in_process", [](const std::string& v) {
            if (v == "in_process") return ExecutionMode::in_process;
            if (v == "multi_process") return ExecutionMode::multi_process;
            throw std::invalid_argument(v);
        });
        e.board = s.text("board", e.board);
        e.timeout = std::chrono::milliseconds(s.uint("timeout_ms", static_cast<std::uint64_t>(e.timeout.count())));
        e.poll = std::chrono::milliseconds(s.uint("poll_ms", static_cast<std::uint64_t>(e.poll.count())));
        e.threads = s.size("threads", e.threads);
        if (e.threads == 0) fail("execution.threads", "must be at least 1");
        if (e.poll.count() == 0) fail("execution.poll_ms", "must be positive");
        s.finish();
    }

    root.finish();

    try {
        cfg.make_setup().validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        fail("landscape", e.what());
    }
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return from_json(j, seed_override);
}

json RunConfig::landscape_json() const {
    const LandscapeSpec& l = landscape;
    json j = {{"kind", l.kind}};
    if (l.kind == "mlp") {
        j["features"] = l.features;
        j["hidden"] = l.hidden;
        j["classes"] = l.classes;
        j["batch_size"] = l.batch_size;
        j["dataset"] = {{"kind", l.dataset.kind},
                        {"train_size", l.dataset.train_size},
                        {"test_size", l.dataset.test_size},
                        {"noise", l.dataset.noise},
                        {"feature_scale", l.dataset.feature_scale}};
    } else {
        j["dimension"] = l.dimension;
        if (l.kind == "sphere") j["scale"] = l.scale;
        if (l.init_low) j["init_low"] = *l.init_low;
        if (l.init_high) j["init_high"] = *l.init_high;
    }
    return j;
}

json RunConfig::to_json() const {
    json policies = json::array();
    for (const auto& p : lr_policies) policies.push_back(policy_json(p));

    const DynamicsConfig& d = dynamics;
    json matrix = json::array();
    for (std::size_t r = 0; r < d.weights.n; ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < d.weights.n; ++c) row.push_back(d.weights.at(r, c));
        matrix.push_back(row);
    }

    return {
        {"run_id", run_id},
        {"landscape", landscape_json()},
        {"swarm", {{"particles", particles}}},
        {"lr", {{"policies", policies}}},
        {"dynamics",
         {{"variant", to_string(d.variant)},
          {"k", d.k},
          {"c1", d.c1},
          {"c2", d.c2},
          {"c", d.c},
          {"inertia", d.inertia},
          {"warmup_epochs", d.warmup_epochs},
          {"epochs", d.epochs},
          {"steps_per_epoch", d.steps_per_epoch},
          {"dynamics2_mode", to_string(d.dynamics2_mode)},
          {"r_mode", to_string(d.r_mode)},
          {"position_update", to_string(d.position_update)},
          {"intermediate_sgd", d.intermediate_sgd},
          {"weights",
           {{"beta", d.weights.beta},
            {"self_weight", d.weights.self_mode == SelfWeight::include_self ? "include_self" : "exclude_self"},
            {"matrix", matrix}}}}},
        {"seeds", {{"master", seeds.master}, {"dataset", seeds.dataset}, {"init", seeds.init}, {"rng", seeds.rng}}},
        {"execution",
         {{"mode", execution.mode == ExecutionMode::in_process ? "in_process" : "multi_process"},
          {"board", execution.board},
          {"timeout_ms", execution.timeout.count()},
          {"poll_ms", execution.poll.count()},
          {"threads", execution.threads}}},
        {"scan",
         {{"lr_min", scan.lr_min},
          {"lr_max", scan.lr_max},
          {"points", scan.points},
          {"steps_per_lr", scan.steps_per_lr},
          {"seed", scan.seed}}},
    };
}

SwarmSetup RunConfig::make_setup() const {
    SwarmSetup s;
    s.landscape = make_landscape(landscape);
    s.dynamics = dynamics;
    s.lr_policies = lr_policies;
    s.init_seeds = seeds.init;
    s.rng_seeds = seeds.rng;
    return s;
}

}  // namespace swarmlearn
