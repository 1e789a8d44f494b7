#include "swarmlearn/scoreboard.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace swarmlearn {

namespace {

constexpr char kMagic[4] = {'S', 'W', 'V', 'P'};
constexpr const char* kPayloadKinds[3] = {"pos", "grad", "pbest"};

template <typename T>
void put_le(std::vector<unsigned char>& out, T value) {
    static_assert(std::endian::native == std::endian::little, "little-endian host expected");
    const auto* p = reinterpret_cast<const unsigned char*>(&value);
    out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get_le(std::span<const unsigned char> bytes, std::size_t offset) {
    T value;
    std::memcpy(&value, bytes.data() + offset, sizeof(T));
    return value;
}

std::vector<unsigned char> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path temp_sibling(const fs::path& target) {
    return target.parent_path() / ("." + target.filename().string() + ".tmp." + std::to_string(::getpid()));
}

void write_all(int fd, const unsigned char* data, std::size_t n, const fs::path& path) {
    while (n > 0) {
        const ssize_t w = ::write(fd, data, n);
        if (w < 0) {
            if (errno == EINTR) continue;
            ::close(fd);
            throw PublishError("failed writing " + path.string() + ": " + std::strerror(errno));
        }
        data += w;
        n -= static_cast<std::size_t>(w);
    }
}

// Writes and fsyncs `bytes`, pausing at the midpoint for fault injection.
void write_bytes(const fs::path& path, std::span<const unsigned char> bytes, const PublishFaultHook& hook, int payload) {
    const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw PublishError("cannot create " + path.string() + ": " + std::strerror(errno));
    const std::size_t half = bytes.size() / 2;
    write_all(fd, bytes.data(), half, path);
    if (hook) hook(PublishStage::payload_partial, payload);
    write_all(fd, bytes.data() + half, bytes.size() - half, path);
    if (::fsync(fd) != 0 || ::close(fd) != 0)
        throw PublishError("failed syncing " + path.string() + ": " + std::strerror(errno));
}

void commit(const fs::path& tmp, const fs::path& target) {
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw PublishError("cannot rename " + tmp.string() + ": " + ec.message());
}

// Like commit, but never replaces an existing target.
bool commit_exclusive(const fs::path& tmp, const fs::path& target) {
    const int rc = ::link(tmp.c_str(), target.c_str());
    const int err = errno;
    ::unlink(tmp.c_str());
    if (rc == 0) return true;
    if (err == EEXIST) return false;
    throw PublishError("cannot publish " + target.string() + ": " + std::strerror(err));
}

std::string fmt_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_real(std::string_view s, std::string_view key) {
    const std::string tmp(s);
    char* end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (tmp.empty() || end != tmp.c_str() + tmp.size()) throw IntegrityError("bad real in record field " + std::string(key));
    return v;
}

template <typename T>
T parse_uint(std::string_view s, std::string_view key, int base = 10) {
    T v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw IntegrityError("bad integer in record field " + std::string(key));
    return v;
}

bool valid_run_id(const std::string& id) {
    if (id.empty() || id[0] == '.') return false;
    return std::all_of(id.begin(), id.end(), [](char ch) {
        return std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.';
    });
}

// Parses "p<particle>_e<epoch>.rec"; nullopt for anything else.
std::optional<std::pair<ParticleId, std::size_t>> parse_record_name(const std::string& name) {
    if (name.size() < 8 || name[0] != 'p' || !name.ends_with(".rec")) return std::nullopt;
    const auto sep = name.find("_e");
    if (sep == std::string::npos) return std::nullopt;
    ParticleId p{};
    std::size_t e{};
    const char* b = name.data();
    auto r1 = std::from_chars(b + 1, b + sep, p);
    auto r2 = std::from_chars(b + sep + 2, b + name.size() - 4, e);
    if (r1.ec != std::errc{} || r1.ptr != b + sep || r2.ec != std::errc{} || r2.ptr != b + name.size() - 4)
        return std::nullopt;
    return std::make_pair(p, e);
}

}  // namespace

std::vector<unsigned char> encode_payload(std::span<const double> values) {
    std::vector<unsigned char> out;
    out.reserve(kPayloadHeaderSize + values.size_bytes());
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    put_le<std::uint32_t>(out, kPayloadSchemaVersion);
    put_le<std::uint32_t>(out, sizeof(double));
    put_le<std::uint32_t>(out, 0);
    put_le<std::uint64_t>(out, values.size());
    for (double v : values) put_le<double>(out, v);
    return out;
}

Vector decode_payload(std::span<const unsigned char> bytes) {
    if (bytes.size() < kPayloadHeaderSize || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw IntegrityError("vector payload has a bad header");
    if (get_le<std::uint32_t>(bytes, 4) != kPayloadSchemaVersion) throw IntegrityError("unsupported payload version");
    if (get_le<std::uint32_t>(bytes, 8) != sizeof(double)) throw IntegrityError("unsupported payload element width");
    const auto dim = get_le<std::uint64_t>(bytes, 16);
    if (bytes.size() != kPayloadHeaderSize + dim * sizeof(double))
        throw IntegrityError("payload body length does not match its declared dimension");
    Vector v(dim);
    if (dim > 0) std::memcpy(v.data(), bytes.data() + kPayloadHeaderSize, dim * sizeof(double));
    return v;
}

void write_payload_file(const fs::path& path, std::span<const double> values) {
    const auto bytes = encode_payload(values);
    const auto tmp = temp_sibling(path);
    write_bytes(tmp, bytes, {}, -1);
    commit(tmp, path);
}

Vector read_payload_file(const fs::path& path) { return decode_payload(read_file(path)); }

std::string format_record(const ScoreboardRecord& r) {
    std::ostringstream s;
    char sum[17];
    std::snprintf(sum, sizeof sum, "%016llx", static_cast<unsigned long long>(r.checksum));
    s << "schema_version=" << r.schema_version << "\trun_id=" << r.run_id << "\tparticle_id=" << r.particle_id
      << "\tepoch=" << r.epoch << "\tphase=" << to_string(r.phase) << "\tlr_used=" << fmt_real(r.lr_used)
      << "\ttrain_loss=" << fmt_real(r.train_loss) << "\teval_loss=" << fmt_real(r.eval_loss)
      << "\taccuracy=" << fmt_real(r.accuracy) << "\tpbest_loss=" << fmt_real(r.pbest_loss)
      << "\tposition_ref=" << r.position_ref << "\tgradient_ref=" << r.gradient_ref << "\tpbest_ref=" << r.pbest_ref
      << "\tchecksum=" << sum << "\twall_time=" << r.wall_time_ns << '\n';
    return s.str();
}

ScoreboardRecord parse_record(std::string_view line) {
    static constexpr std::string_view keys[] = {
        "schema_version", "run_id", "particle_id", "epoch", "phase", "lr_used", "train_loss", "eval_loss",
        "accuracy", "pbest_loss", "position_ref", "gradient_ref", "pbest_ref", "checksum", "wall_time"};
    if (line.ends_with('\n')) line.remove_suffix(1);
    std::vector<std::string_view> values;
    std::size_t start = 0;
    for (std::size_t i = 0; i < std::size(keys); ++i) {
        const auto end = std::min(line.find('\t', start), line.size());
        const auto field = line.substr(start, end - start);
        const auto eq = field.find('=');
        if (eq == std::string_view::npos || field.substr(0, eq) != keys[i])
            throw IntegrityError("record field " + std::to_string(i) + " should be '" + std::string(keys[i]) + "'");
        values.push_back(field.substr(eq + 1));
        start = end + 1;
        if (end == line.size() && i + 1 < std::size(keys)) throw IntegrityError("record is truncated");
    }
    if (start < line.size()) throw IntegrityError("record has trailing fields");

    ScoreboardRecord r;
    r.schema_version = parse_uint<std::uint32_t>(values[0], keys[0]);
    if (r.schema_version != kRecordSchemaVersion) throw IntegrityError("unsupported record schema version");
    r.run_id = values[1];
    r.particle_id = parse_uint<ParticleId>(values[2], keys[2]);
    r.epoch = parse_uint<std::size_t>(values[3], keys[3]);
    r.phase = phase_from_string(std::string(values[4]));
    r.lr_used = parse_real(values[5], keys[5]);
    r.train_loss = parse_real(values[6], keys[6]);
    r.eval_loss = parse_real(values[7], keys[7]);
    r.accuracy = parse_real(values[8], keys[8]);
    r.pbest_loss = parse_real(values[9], keys[9]);
    r.position_ref = values[10];
    r.gradient_ref = values[11];
    r.pbest_ref = values[12];
    r.checksum = parse_uint<std::uint64_t>(values[13], keys[13], 16);
    const std::string wt(values[14]);
    char* end = nullptr;
    r.wall_time_ns = std::strtoll(wt.c_str(), &end, 10);
    if (wt.empty() || *end != '\0') throw IntegrityError("bad wall_time in record");
    return r;
}

BarrierTimeout::BarrierTimeout(std::size_t epoch, std::vector<ParticleId> missing)
    : CoordinationError([&] {
          std::string msg = "barrier timeout at epoch " + std::to_string(epoch) + "; missing particles:";
          for (auto id : missing) msg += " " + std::to_string(id);
          return msg;
      }()),
      missing_(std::move(missing)) {}

Scoreboard::Scoreboard(fs::path board_dir, std::string run_id)
    : board_dir_(std::move(board_dir)), run_id_(std::move(run_id)), run_dir_(board_dir_ / run_id_) {
    if (!valid_run_id(run_id_)) throw ConfigError("run id '" + run_id_ + "' must match [A-Za-z0-9._-]+");
}

void Scoreboard::initialize() const {
    std::error_code ec;
    fs::create_directories(run_dir_ / "records", ec);
    if (!ec) fs::create_directories(run_dir_ / "vectors", ec);
    if (ec) throw PublishError("cannot create board directory " + run_dir_.string() + ": " + ec.message());
}

fs::path Scoreboard::record_path(ParticleId particle, std::size_t epoch) const {
    return run_dir_ / "records" / ("p" + std::to_string(particle) + "_e" + std::to_string(epoch) + ".rec");
}

ScoreboardRecord Scoreboard::publish(const Publication& pub, const PublishFaultHook& hook) const {
    const auto target = record_path(pub.particle, pub.epoch);
    if (fs::exists(target))
        throw ConflictError("particle " + std::to_string(pub.particle) + " already published epoch " +
                            std::to_string(pub.epoch));

    ScoreboardRecord rec;
    rec.run_id = run_id_;
    rec.particle_id = pub.particle;
    rec.epoch = pub.epoch;
    rec.phase = pub.phase;
    rec.lr_used = pub.lr;
    rec.train_loss = pub.train_loss;
    rec.eval_loss = pub.eval_loss;
    rec.accuracy = pub.accuracy;
    rec.pbest_loss = pub.pbest.loss;

    const std::span<const double> vectors[3] = {pub.position, pub.gradient, pub.pbest.position};
    std::string* refs[3] = {&rec.position_ref, &rec.gradient_ref, &rec.pbest_ref};
    const std::string stem = "p" + std::to_string(pub.particle) + "_e" + std::to_string(pub.epoch) + "_";
    Fnv1a sum;
    for (int i = 0; i < 3; ++i) {
        *refs[i] = "vectors/" + stem + kPayloadKinds[i] + ".vec";
        const auto bytes = encode_payload(vectors[i]);
        sum.update(bytes.data(), bytes.size());
        const auto path = run_dir_ / *refs[i];
        const auto tmp = temp_sibling(path);
        if (hook) hook(PublishStage::payload_begin, i);
        write_bytes(tmp, bytes, hook, i);
        if (hook) hook(PublishStage::payload_written, i);
        commit(tmp, path);
        if (hook) hook(PublishStage::payload_renamed, i);
    }
    rec.checksum = sum.digest();
    rec.wall_time_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                           std::chrono::system_clock::now().time_since_epoch())
                           .count();

    const auto line = format_record(rec);
    const auto tmp = temp_sibling(target);
    write_bytes(tmp, {reinterpret_cast<const unsigned char*>(line.data()), line.size()}, {}, -1);
    if (hook) hook(PublishStage::record_written, -1);
    if (!commit_exclusive(tmp, target))
        throw ConflictError("particle " + std::to_string(pub.particle) + " already published epoch " +
                            std::to_string(pub.epoch));
    if (hook) hook(PublishStage::record_renamed, -1);
    return rec;
}

std::optional<ScoreboardRecord> Scoreboard::find(ParticleId particle, std::size_t epoch) const {
    const auto path = record_path(particle, epoch);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::string line((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto rec = parse_record(line);
    if (rec.particle_id != particle || rec.epoch != epoch || rec.run_id != run_id_)
        throw IntegrityError("record " + path.string() + " does not match its file name");
    return rec;
}

Publication Scoreboard::load(const ScoreboardRecord& rec) const {
    Fnv1a sum;
    Vector vectors[3];
    const std::string* refs[3] = {&rec.position_ref, &rec.gradient_ref, &rec.pbest_ref};
    for (int i = 0; i < 3; ++i) {
        const auto bytes = read_file(run_dir_ / *refs[i]);
        sum.update(bytes.data(), bytes.size());
        vectors[i] = decode_payload(bytes);
    }
    if (sum.digest() != rec.checksum)
        throw IntegrityError("checksum mismatch for particle " + std::to_string(rec.particle_id) + " epoch " +
                             std::to_string(rec.epoch));
    Publication pub;
    pub.particle = rec.particle_id;
    pub.epoch = rec.epoch;
    pub.phase = rec.phase;
    pub.lr = rec.lr_used;
    pub.train_loss = rec.train_loss;
    pub.eval_loss = rec.eval_loss;
    pub.accuracy = rec.accuracy;
    pub.position = std::move(vectors[0]);
    pub.gradient = std::move(vectors[1]);
    pub.pbest = {std::move(vectors[2]), rec.pbest_loss};
    return pub;
}

std::vector<Publication> Scoreboard::barrier_wait(std::size_t epoch, std::span<const ParticleId> expected,
                                                  std::chrono::milliseconds timeout,
                                                  std::chrono::milliseconds poll_interval) const {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    std::vector<std::optional<Publication>> found(expected.size());
    for (;;) {
        std::vector<ParticleId> missing;
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (found[i]) continue;
            if (auto rec = find(expected[i], epoch))
                found[i] = load(*rec);
            else
                missing.push_back(expected[i]);
        }
        if (missing.empty()) break;
        if (std::chrono::steady_clock::now() >= deadline) throw BarrierTimeout(epoch, std::move(missing));
        std::this_thread::sleep_for(poll_interval);
    }
    std::vector<Publication> out;
    out.reserve(found.size());
    for (auto& f : found) out.push_back(std::move(*f));
    return out;
}

std::vector<ScoreboardRecord> Scoreboard::read_history(ParticleId particle, std::size_t up_to_epoch) const {
    const auto dir = run_dir_ / "records";
    if (!fs::is_directory(run_dir_)) throw NotFoundError("no board at " + run_dir_.string());
    std::vector<std::size_t> epochs;
    if (fs::is_directory(dir)) {
        for (const auto& entry : fs::directory_iterator(dir)) {
            const auto parsed = parse_record_name(entry.path().filename().string());
            if (parsed && parsed->first == particle && parsed->second <= up_to_epoch) epochs.push_back(parsed->second);
        }
    }
    std::sort(epochs.begin(), epochs.end());
    std::vector<ScoreboardRecord> out;
    out.reserve(epochs.size());
    for (auto e : epochs) out.push_back(*find(particle, e));
    return out;
}

ScoreboardExchange::ScoreboardExchange(const Scoreboard& board, std::size_t particles,
                                       std::chrono::milliseconds timeout, std::chrono::milliseconds poll_interval)
    : board_(board), timeout_(timeout), poll_(poll_interval) {
    for (ParticleId i = 0; i < particles; ++i) everyone_.push_back(i);
}

std::optional<Publication> ScoreboardExchange::published(ParticleId particle, std::size_t epoch) {
    if (auto rec = board_.find(particle, epoch)) return board_.load(*rec);
    return std::nullopt;
}

void ScoreboardExchange::publish(const Publication& pub) { board_.publish(pub); }

SwarmSnapshot ScoreboardExchange::barrier(std::size_t epoch) {
    return board_.barrier_wait(epoch, everyone_, timeout_, poll_);
}

}  // namespace swarmlearn
