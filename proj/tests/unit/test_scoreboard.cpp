#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <thread>

#include "doctest.h"
#include "swarmlearn/scoreboard.hpp"

using namespace swarmlearn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("swarmlearn_sb_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int n = 0;
        return n;
    }
};

Publication sample(ParticleId id, std::size_t epoch, double base = 0.0) {
    Publication p;
    p.particle = id;
    p.epoch = epoch;
    p.phase = Phase::collaborative;
    p.lr = 0.01;
    p.train_loss = 0.5;
    p.eval_loss = 0.25 + base;
    p.accuracy = std::nan("");
    p.position = {base + 1.0, -2.0, 1e-300};
    p.gradient = {0.1, 0.2, -0.3};
    p.pbest = {{0.0, 0.0, 0.0}, 0.125};
    return p;
}

std::vector<unsigned char> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("payload header layout and round trip") {
    const Vector v{1.5, -0.0, 3e-310, INFINITY};
    const auto bytes = encode_payload(v);
    REQUIRE(bytes.size() == kPayloadHeaderSize + 4 * 8);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "SWVP");
    CHECK(bytes[4] == 1);  // version, little-endian
    CHECK(bytes[8] == 8);  // element width
    CHECK(bytes[16] == 4);  // dimension
    const Vector back = decode_payload(bytes);
    REQUIRE(back.size() == 4);
    CHECK(std::memcmp(back.data(), v.data(), sizeof(double) * 4) == 0);

    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_payload(bad), IntegrityError);
    bad = bytes;
    bad.pop_back();
    CHECK_THROWS_AS(decode_payload(bad), IntegrityError);
    bad = bytes;
    bad[4] = 2;
    CHECK_THROWS_AS(decode_payload(bad), IntegrityError);
}

TEST_CASE("records round trip and reject malformed lines") {
    ScoreboardRecord r;
    r.run_id = "r-1";
    r.particle_id = 3;
    r.epoch = 17;
    r.phase = Phase::collaborative;
    r.lr_used = 0.1;
    r.train_loss = 1.0 / 3.0;
    r.eval_loss = 2.0 / 3.0;
    r.accuracy = 0.875;
    r.pbest_loss = 0.5;
    r.position_ref = "vectors/a.vec";
    r.gradient_ref = "vectors/b.vec";
    r.pbest_ref = "vectors/c.vec";
    r.checksum = 0xdeadbeefcafef00dULL;
    r.wall_time_ns = 123456789;
    const std::string line = format_record(r);
    CHECK(line.back() == '\n');
    const ScoreboardRecord back = parse_record(line);
    CHECK(back.train_loss == r.train_loss);
    CHECK(back.eval_loss == r.eval_loss);
    CHECK(back.checksum == r.checksum);
    CHECK(back.phase == r.phase);
    CHECK(format_record(back) == line);

    CHECK_THROWS_AS(parse_record(line.substr(0, line.size() / 2)), IntegrityError);
    CHECK_THROWS_AS(parse_record("schema_version=1\trun_id=x"), IntegrityError);
    std::string swapped = line;
    swapped.replace(swapped.find("epoch="), 6, "epoxh=");
    CHECK_THROWS_AS(parse_record(swapped), IntegrityError);
}

TEST_CASE("publish, find, load") {
    TempDir tmp;
    const Scoreboard board(tmp.path, "run");
    board.initialize();
    const Publication pub = sample(1, 0);
    board.publish(pub);
    const auto rec = board.find(1, 0);
    REQUIRE(rec);
    CHECK(rec->position_ref == "vectors/p1_e0_pos.vec");
    const Publication back = board.load(*rec);
    CHECK(back.position == pub.position);
    CHECK(back.gradient == pub.gradient);
    CHECK(back.pbest.position == pub.pbest.position);
    CHECK(back.pbest.loss == pub.pbest.loss);
    CHECK(back.lr == pub.lr);
    CHECK(std::isnan(back.accuracy));
    CHECK_FALSE(board.find(0, 0));

    CHECK_THROWS_AS(board.publish(pub), ConflictError);

    // no temporaries left behind
    for (const auto& e : fs::recursive_directory_iterator(board.run_dir()))
        CHECK(e.path().filename().string().front() != '.');
}

TEST_CASE("tampered payloads fail the checksum") {
    TempDir tmp;
    const Scoreboard board(tmp.path, "run");
    board.initialize();
    board.publish(sample(0, 0));
    const fs::path grad = board.run_dir() / "vectors" / "p0_e0_grad.vec";
    auto bytes = slurp(grad);
    bytes.back() ^= 1;
    std::ofstream(grad, std::ios::binary | std::ios::trunc).write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    CHECK_THROWS_AS(board.load(*board.find(0, 0)), IntegrityError);
}

TEST_CASE("run ids are restricted to safe names") {
    CHECK_THROWS_AS(Scoreboard("b", "../escape"), ConfigError);
    CHECK_THROWS_AS(Scoreboard("b", ".hidden"), ConfigError);
    CHECK_THROWS_AS(Scoreboard("b", ""), ConfigError);
    CHECK_NOTHROW(Scoreboard("b", "ok_run-1.2"));
}

TEST_CASE("barrier waits for late publishers and names the missing ones on timeout") {
    TempDir tmp;
    const Scoreboard board(tmp.path, "run");
    board.initialize();
    board.publish(sample(0, 4));
    std::thread late([&] {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        board.publish(sample(1, 4));
    });
    const std::vector<ParticleId> both{0, 1};
    const auto got = board.barrier_wait(4, both, std::chrono::seconds(5), std::chrono::milliseconds(5));
    late.join();
    REQUIRE(got.size() == 2);
    CHECK(got[1].particle == 1);

    const std::vector<ParticleId> three{0, 1, 2};
    try {
        board.barrier_wait(4, three, std::chrono::milliseconds(30), std::chrono::milliseconds(5));
        FAIL("barrier should have timed out");
    } catch (const BarrierTimeout& e) {
        CHECK(e.missing() == std::vector<ParticleId>{2});
        CHECK(std::string(e.what()).find('2') != std::string::npos);
    }
}

TEST_CASE("history is ordered and bounded") {
    TempDir tmp;
    const Scoreboard board(tmp.path, "run");
    board.initialize();
    for (std::size_t e : {3, 0, 2, 1, 5}) board.publish(sample(0, e));
    board.publish(sample(1, 0));
    const auto h = board.read_history(0, 3);
    REQUIRE(h.size() == 4);
    for (std::size_t i = 0; i < h.size(); ++i) CHECK(h[i].epoch == i);
    CHECK(board.read_history(2, 10).empty());
    CHECK_THROWS_AS(Scoreboard(tmp.path, "absent").read_history(0, 1), NotFoundError);
}

TEST_CASE("a publisher killed at any stage never exposes a bad record") {
    TempDir tmp;
    const Scoreboard board(tmp.path, "run");
    board.initialize();
    std::size_t epoch = 0;
    for (int stage = 0; stage <= static_cast<int>(PublishStage::record_renamed); ++stage) {
        for (int payload = -1; payload < 3; ++payload) {
            const Publication pub = sample(0, epoch++, 0.5);
            const pid_t pid = ::fork();
            REQUIRE(pid >= 0);
            if (pid == 0) {
                try {
                    board.publish(pub, [&](PublishStage s, int i) {
                        if (static_cast<int>(s) == stage && i == payload) ::_exit(0);
                    });
                } catch (...) {
                    ::_exit(2);
                }
                ::_exit(0);
            }
            int status = 0;
            ::waitpid(pid, &status, 0);
            CHECK(WIFEXITED(status));
            if (const auto rec = board.find(pub.particle, pub.epoch)) {
                CHECK(board.load(*rec).position == pub.position);
            } else {
                // the restarted publisher completes normally
                board.publish(pub);
                CHECK(board.load(*board.find(pub.particle, pub.epoch)).position == pub.position);
            }
        }
    }
}
