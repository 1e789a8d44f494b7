// Drives the built command-line tool end to end.
#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Sandbox {
    fs::path dir;
    Sandbox() {
        static int n = 0;
        dir = fs::temp_directory_path() / ("swarmlearn_cli_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Sandbox() { fs::remove_all(dir); }

    fs::path write(const std::string& name, const json& j) const {
        std::ofstream(dir / name) << j.dump(2);
        return dir / name;
    }

    // Runs the CLI from inside the sandbox; returns the exit status.
    int run(const std::string& args) const {
        const std::string cmd = "cd '" + dir.string() + "' && '" SWARMLEARN_CLI "' " + args + " > '" +
                                (dir / "stdout.txt").string() + "' 2> '" + (dir / "stderr.txt").string() + "'";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string read(const fs::path& rel) const {
        std::ifstream in(dir / rel, std::ios::binary);
        std::stringstream s;
        s << in.rdbuf();
        return s.str();
    }
};

json sphere(int epochs = 30) {
    return json::parse(R"({
        "run_id": "cli",
        "landscape": {"kind": "sphere", "dimension": 4},
        "swarm": {"particles": 3},
        "lr": {"policies": [{"kind": "fixed", "rate": 0.1},
                            {"kind": "fixed", "rate": 0.01},
                            {"kind": "random_loguniform", "min": 1e-4, "max": 1e-1}]},
        "dynamics": {"variant": "dynamics1", "k": 2, "c2": 0.5, "epochs": )" +
                      std::to_string(epochs) + "}}");
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("run writes metrics, summary and the resolved config, reproducibly") {
    Sandbox box;
    box.write("c.json", sphere());
    REQUIRE(box.run("run --config c.json --out a") == 0);
    REQUIRE(box.run("run --config c.json --out b") == 0);
    const std::string metrics = box.read("a/metrics.csv");
    CHECK(lines(metrics) == 1 + 3 * 30);
    CHECK(metrics.rfind("epoch,particle,phase,lr,train_loss,eval_loss,accuracy,D_0_1,D_0_2,D_1_2\n", 0) == 0);
    CHECK(metrics == box.read("b/metrics.csv"));
    CHECK(box.read("a/summary.txt") == box.read("b/summary.txt"));
    CHECK(box.read("a/summary.txt").find("Best PSO by loss") != std::string::npos);
    const json resolved = json::parse(box.read("a/run_config_resolved.json"));
    CHECK(resolved["seeds"]["init"].size() == 3);

    REQUIRE(box.run("run --config c.json --out c --seed-override 9") == 0);
    CHECK(box.read("c/metrics.csv") != metrics);
}

TEST_CASE("multi-process run matches in-process output") {
    Sandbox box;
    json j = sphere(12);
    box.write("in.json", j);
    j["execution"] = {{"mode", "multi_process"}, {"board", "board"}, {"poll_ms", 2}};
    box.write("mp.json", j);
    REQUIRE(box.run("run --config in.json --out in") == 0);
    REQUIRE(box.run("run --config mp.json --out mp") == 0);
    CHECK(box.read("in/metrics.csv") == box.read("mp/metrics.csv"));
    CHECK(box.read("in/summary.txt") == box.read("mp/summary.txt"));
    CHECK(fs::exists(box.dir / "board/cli/records/p2_e11.rec"));

    // the same run id cannot be reused on the board
    CHECK(box.run("run --config mp.json --out again") == 2);
    CHECK(box.run("run --config mp.json --out again --run-id second") == 0);
}

TEST_CASE("configuration problems exit with status 2") {
    Sandbox box;
    json j = sphere();
    j["dynamics"]["k"] = 7;
    box.write("bad.json", j);
    CHECK(box.run("run --config bad.json --out o") == 2);
    CHECK(box.read("stderr.txt").find("dynamics") != std::string::npos);
    CHECK(box.run("run --config missing.json") == 2);
    CHECK(box.run("frobnicate") == 2);

    box.write("ok.json", sphere());
    CHECK(box.run("worker --config ok.json --board b --run-id r --particle 3") == 2);
}

TEST_CASE("divergence exits with status 3 and keeps the last good positions") {
    Sandbox box;
    json j = sphere(400);
    j["lr"]["policies"][0]["rate"] = 1e3;
    box.write("hot.json", j);
    CHECK(box.run("run --config hot.json --out o") == 3);
    CHECK(fs::exists(box.dir / "o/last_good/p0.vec"));
    CHECK(lines(box.read("o/metrics.csv")) >= 1);
}

TEST_CASE("a lone worker times out at the barrier with status 4") {
    Sandbox box;
    json j = sphere(5);
    j["execution"] = {{"mode", "multi_process"}, {"board", "board"}, {"timeout_ms", 200}, {"poll_ms", 10}};
    box.write("c.json", j);
    fs::create_directories(box.dir / "board/lonely/records");
    fs::create_directories(box.dir / "board/lonely/vectors");
    CHECK(box.run("worker --config c.json --board board --run-id lonely --particle 0") == 4);
    const std::string err = box.read("stderr.txt");
    CHECK(err.find("1") != std::string::npos);
    CHECK(err.find("2") != std::string::npos);
}

TEST_CASE("lr-scan writes one row per rate") {
    Sandbox box;
    json j = sphere();
    j["scan"] = {{"lr_min", 1e-3}, {"lr_max", 1.5}, {"points", 5}, {"steps_per_lr", 50}};
    box.write("c.json", j);
    REQUIRE(box.run("lr-scan --config c.json --out s") == 0);
    const std::string csv = box.read("s/lr_scan.csv");
    CHECK(lines(csv) == 6);
    CHECK(csv.find("1.5,") != std::string::npos);
}

TEST_CASE("compare tables both variants and rejects mismatched landscapes") {
    Sandbox box;
    json d1 = sphere(20);
    json sgd = sphere(20);
    sgd["dynamics"] = {{"variant", "sgd_only"}, {"k", 2}, {"epochs", 20}};
    box.write("d1.json", d1);
    box.write("sgd.json", sgd);
    REQUIRE(box.run("compare --config d1.json --config sgd.json --seeds 3 --out cmp") == 0);
    const std::string table = box.read("cmp/compare.txt");
    CHECK(table.find("d1") != std::string::npos);
    CHECK(table.find("sgd") != std::string::npos);
    CHECK(lines(box.read("cmp/compare.csv")) == 1 + 2 * 3);

    json other = sphere(20);
    other["landscape"]["dimension"] = 5;
    box.write("other.json", other);
    CHECK(box.run("compare --config d1.json --config other.json --seeds 2 --out cmp2") == 2);
}
