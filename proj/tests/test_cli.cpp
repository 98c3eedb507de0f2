#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hall_lab/config.hpp"
#include "hall_lab/errors.hpp"
#include "hall_lab/runner.hpp"

using namespace hall;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

fs::path scratch(const std::string& tag) {
    fs::path d = fs::temp_directory_path() / ("hall_lab_cli_" + tag);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

int run_cli(const std::string& args) {
    const char* bin = std::getenv("HALL_LAB_BIN");
    REQUIRE(bin != nullptr);
    int rc = std::system(("\"" + std::string(bin) + "\" " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config round trip") {
    for (const char* f : {"bulk.conf", "edge.conf", "edge_localized.conf", "topology.conf", "harper.conf",
                          "montecarlo.conf", "diagnose.conf"}) {
        CAPTURE(f);
        ExperimentConfig c = load_config(std::string(HALL_LAB_CONFIG_DIR) + "/" + f);
        ExperimentConfig d = parse_config(serialize_config(c));
        CHECK(c == d);
        CHECK(config_hash(c) == config_hash(d));
        CHECK(serialize_config(d) == serialize_config(c));
    }
    ExperimentConfig real = parse_config("command = harper\nname = r\nflux = 0.1234567890123\n");
    CHECK_FALSE(real.flux_rational);
    CHECK(parse_config(serialize_config(real)) == real);
    CHECK(config_hash(real).size() == 16);
}

TEST_CASE("config errors carry line numbers") {
    CHECK(error_of("command = bulk\nname = x\nbogus = 1\n").find("line 3") != std::string::npos);
    CHECK(error_of("command = bulk\n\n# note\nbox_x1 = 4:2\n").find("line 4") != std::string::npos);
    CHECK(error_of("command = bulk\ncommand = edge\n").find("duplicate") != std::string::npos);
    CHECK(error_of("command = bulk\nwindow 3\n").find("line 2") != std::string::npos);
    CHECK(error_of("command = bulk\nflux = 0.1\nflux_den = 4\n").find("either") != std::string::npos);
    CHECK(error_of("command = harper\nsamples = 1\n").find("samples") != std::string::npos);
    CHECK(error_of("command = bulk\nrho_lo = 1\nrho_hi = 0\n").find("rho_lo") != std::string::npos);
    CHECK(error_of("command = bulk\nz = 1\n").find("re,im") != std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/hall.conf"), ConfigError);
}

TEST_CASE("csv formatting") {
    CsvTable t{"bulk", {"a", "b"}, {{"1", "nan"}}};
    CHECK(t.render() == "# hall-lab schema=1 command=bulk\na,b\n1,nan\n");
    CHECK(parse_config("command = bulk\nalpha = " + format_double(0.1) + "\n").alpha == 0.1);
}

TEST_CASE("exit codes") {
    fs::path d = scratch("exit");
    spit(d / "bad.conf", "command = bulk\nname = bad\nbox_x1 = 3:1\n");
    CHECK(run_cli("bulk --config " + (d / "bad.conf").string() + " --out " + d.string()) == kExitConfig);
    CHECK(run_cli("bulk --config " + (d / "missing.conf").string()) == kExitConfig);
    spit(d / "mismatch.conf", "command = edge\nname = m\n");
    CHECK(run_cli("bulk --config " + (d / "mismatch.conf").string() + " --out " + d.string()) == kExitConfig);
    CHECK(run_cli("frobnicate --config " + (d / "bad.conf").string()) != kExitOk);
    CHECK_FALSE(fs::exists(d / "bad.csv"));
}

TEST_CASE("empty lambda grid") {
    fs::path d = scratch("empty");
    spit(d / "e.conf", "command = bulk\nname = empty\nbox_x1 = -6:6\nbox_x2 = -6:6\nwindow = 3\n");
    REQUIRE(run_cli("bulk --config " + (d / "e.conf").string() + " --out " + d.string() + " --threads 2") ==
            kExitOk);
    std::string csv = slurp(d / "empty.csv");
    std::istringstream is(csv);
    std::string first, second, rest;
    std::getline(is, first);
    std::getline(is, second);
    CHECK(first == "# hall-lab schema=1 command=bulk");
    CHECK(second.rfind("lambda,", 0) == 0);
    CHECK_FALSE(std::getline(is, rest));

    auto m = nlohmann::json::parse(slurp(d / "empty.manifest.json"));
    for (const char* key : {"tool", "version", "schema_version", "command", "config_hash", "seed", "threads",
                            "wall_time_seconds", "outputs", "rows", "alarms", "config"})
        CHECK_MESSAGE(m.contains(key), key);
    CHECK(m["command"] == "bulk");
    CHECK(m["threads"] == 2);
    CHECK(m["rows"] == 0);
    CHECK(m["schema_version"] == kSchemaVersion);
    CHECK(m["config_hash"] == config_hash(load_config((d / "e.conf").string())));
}

TEST_CASE("seed override and repeatability") {
    fs::path d = scratch("seed");
    spit(d / "s.conf",
         "command = bulk\nname = s\nalpha = 2\nseed = 5\nbox_x1 = -6:6\nbox_x2 = -6:6\nwindow = 3\n"
         "lambda_grid = -1.3\nrho_lo = -1.9\nrho_hi = -0.9\n");
    std::string base = "bulk --config " + (d / "s.conf").string() + " --threads 1 --out ";
    fs::create_directories(d / "a");
    fs::create_directories(d / "b");
    fs::create_directories(d / "c");
    int ra = run_cli(base + (d / "a").string());
    int rb = run_cli(base + (d / "b").string());
    int rc = run_cli(base + (d / "c").string() + " --seed 6");
    for (int r : {ra, rb, rc}) CHECK((r == kExitOk || r == kExitAlarm));
    CHECK(slurp(d / "a" / "s.csv") == slurp(d / "b" / "s.csv"));
    CHECK(slurp(d / "a" / "s.csv") != slurp(d / "c" / "s.csv"));
    auto m = nlohmann::json::parse(slurp(d / "c" / "s.manifest.json"));
    CHECK(m["seed"] == 6);
}

}
