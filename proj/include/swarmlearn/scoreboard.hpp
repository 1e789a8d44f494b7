#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "swarmlearn/dynamics.hpp"
#include "swarmlearn/errors.hpp"
#include "swarmlearn/trainer.hpp"

namespace swarmlearn {

// Vector payload layout (all little-endian):
//   offset 0   4 bytes  magic "SWVP"
//   offset 4   u32      schema version (1)
//   offset 8   u32      element width in bytes (8)
//   offset 12  u32      reserved, zero
//   offset 16  u64      dimension D
//   offset 24  D x f64  IEEE-754 binary64 body
inline constexpr std::uint32_t kPayloadSchemaVersion = 1;
inline constexpr std::size_t kPayloadHeaderSize = 24;
inline constexpr std::uint32_t kRecordSchemaVersion = 1;

std::vector<unsigned char> encode_payload(std::span<const double> values);
Vector decode_payload(std::span<const unsigned char> bytes);
void write_payload_file(const std::filesystem::path& path, std::span<const double> values);
Vector read_payload_file(const std::filesystem::path& path);

/// One particle-epoch publication. Serialized as a single line of
/// tab-separated key=value fields in the declaration order below.
struct ScoreboardRecord {
    std::uint32_t schema_version = kRecordSchemaVersion;
    std::string run_id;
    ParticleId particle_id = 0;
    std::size_t epoch = 0;
    Phase phase = Phase::warmup;
    double lr_used = 0.0;
    double train_loss = 0.0;
    double eval_loss = 0.0;
    double accuracy = 0.0;
    double pbest_loss = 0.0;
    std::string position_ref;  // relative to the run directory
    std::string gradient_ref;
    std::string pbest_ref;
    std::uint64_t checksum = 0;  // FNV-1a over the pos, grad, pbest payload bytes in that order
    std::int64_t wall_time_ns = 0;
};

std::string format_record(const ScoreboardRecord& rec);
ScoreboardRecord parse_record(std::string_view line);

class BarrierTimeout : public CoordinationError {
public:
    BarrierTimeout(std::size_t epoch, std::vector<ParticleId> missing);
    const std::vector<ParticleId>& missing() const noexcept { return missing_; }

private:
    std::vector<ParticleId> missing_;
};

/// Points in publish() where a fault can be injected. `payload` is 0/1/2 for
/// pos/grad/pbest and -1 for record stages.
enum class PublishStage {
    payload_begin,
    payload_partial,
    payload_written,
    payload_renamed,
    record_written,
    record_renamed,
};
using PublishFaultHook = std::function<void(PublishStage stage, int payload)>;

/// Shared-directory board for one run:
///   <board>/<run_id>/records/p<particle>_e<epoch>.rec
///   <board>/<run_id>/vectors/p<particle>_e<epoch>_{pos,grad,pbest}.vec
/// Every file is written to a dot-prefixed temporary in the same directory,
/// fsynced, then moved into place: payloads by rename, the record by link so
/// an existing record is never replaced. Payloads land before the record, so
/// a visible record always refers to complete payloads.
class Scoreboard {
public:
    Scoreboard(std::filesystem::path board_dir, std::string run_id);

    const std::filesystem::path& run_dir() const noexcept { return run_dir_; }
    const std::string& run_id() const noexcept { return run_id_; }

    void initialize() const;
    ScoreboardRecord publish(const Publication& pub, const PublishFaultHook& hook = {}) const;

    std::optional<ScoreboardRecord> find(ParticleId particle, std::size_t epoch) const;
    /// Loads and checksum-verifies the payloads behind a record.
    Publication load(const ScoreboardRecord& rec) const;

    /// Polls until every expected particle's record for `epoch` is visible,
    /// then returns their publications in the order of `expected`.
    std::vector<Publication> barrier_wait(std::size_t epoch, std::span<const ParticleId> expected,
                                          std::chrono::milliseconds timeout,
                                          std::chrono::milliseconds poll_interval) const;

    std::vector<ScoreboardRecord> read_history(ParticleId particle, std::size_t up_to_epoch) const;

    std::filesystem::path record_path(ParticleId particle, std::size_t epoch) const;

private:
    std::filesystem::path board_dir_;
    std::string run_id_;
    std::filesystem::path run_dir_;
};

/// Exchange over a Scoreboard, expecting every particle 0..N-1 at each barrier.
class ScoreboardExchange final : public Exchange {
public:
    ScoreboardExchange(const Scoreboard& board, std::size_t particles, std::chrono::milliseconds timeout,
                       std::chrono::milliseconds poll_interval);

    std::optional<Publication> published(ParticleId particle, std::size_t epoch) override;
    void publish(const Publication& pub) override;
    SwarmSnapshot barrier(std::size_t epoch) override;

private:
    const Scoreboard& board_;
    std::vector<ParticleId> everyone_;
    std::chrono::milliseconds timeout_;
    std::chrono::milliseconds poll_;
};

}  // namespace swarmlearn
