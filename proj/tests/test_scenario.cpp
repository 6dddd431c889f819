#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <jellybean/scenario.hpp>

using namespace jb;
namespace fs = std::filesystem;

namespace {

// A small, fast scenario used by the unit tests below.
nlohmann::json minimal_config() {
    return nlohmann::json::parse(R"({
        "name": "mini",
        "masterSeed": 7,
        "durationSec": 20.0,
        "protocol": "jellybean",
        "pair": ["A", "D"],
        "scene": {
            "nodes": [
                {"id": "A", "pos": [0.0, 0.0]},
                {"id": "D", "pos": [4.0, 0.0]}
            ],
            "subcarriers": 4,
            "subcarrierJitter": 0.002
        },
        "activity": {
            "kind": "artificial",
            "ratePerSec": 0.5,
            "durationMinSec": 0.08,
            "durationMaxSec": 0.1
        },
        "af": {
            "movingVarianceWindowSec": 0.1,
            "downsampleFactor": 300,
            "lsbCount": 5
        },
        "code": {"symbolBits": 4, "n": 15, "k": 9}
    })");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path fresh_dir(const std::string& tag) {
    fs::path d = fs::temp_directory_path() / ("jb-scn-" + tag + "-" +
                                              std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(JB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("minimal config parses with expected defaults") {
    auto cfg = scenario_from_json(minimal_config());
    CHECK(cfg.name == "mini");
    CHECK(cfg.master_seed == 7);
    CHECK(cfg.protocol == "jellybean");
    CHECK(cfg.pair_a == "A");
    CHECK(cfg.pair_d == "D");
    CHECK(cfg.scene.nodes.size() == 2);
    CHECK(cfg.scene.subcarriers == 4);
    CHECK(cfg.scene.sector_count == 12);               // default
    CHECK(cfg.scene.sector_beamwidth_deg == doctest::Approx(30.0));
    CHECK(cfg.code.n == 15);
    CHECK(cfg.code.k == 9);
    CHECK(cfg.af.lsb_count == 5);
    CHECK(cfg.adversaries.empty());
}

TEST_CASE("config validation rejects malformed input") {
    SUBCASE("not an object") {
        CHECK_THROWS_AS(scenario_from_json(nlohmann::json::array()), ParseError);
    }
    SUBCASE("missing scene") {
        auto j = minimal_config();
        j.erase("scene");
        CHECK_THROWS_AS(scenario_from_json(j), ParseError);
    }
    SUBCASE("bad protocol") {
        auto j = minimal_config();
        j["protocol"] = "bluetooth";
        CHECK_THROWS_AS(scenario_from_json(j), ParseError);
    }
    SUBCASE("pair references unknown node") {
        auto j = minimal_config();
        j["pair"] = {"A", "Z"};
        CHECK_THROWS_AS(scenario_from_json(j), ParseError);
    }
    SUBCASE("pair must have two entries") {
        auto j = minimal_config();
        j["pair"] = {"A"};
        CHECK_THROWS_AS(scenario_from_json(j), ParseError);
    }
    SUBCASE("node without position") {
        auto j = minimal_config();
        j["scene"]["nodes"][0].erase("pos");
        CHECK_THROWS_AS(scenario_from_json(j), ParseError);
    }
    SUBCASE("bad placement mode") {
        auto j = minimal_config();
        j["activity"]["placement"] = {{"mode", "sphere"}};
        CHECK_THROWS_AS(scenario_from_json(j), ParseError);
    }
    SUBCASE("unknown adversary kind") {
        auto j = minimal_config();
        j["adversaries"] = {{{"kind", "pigeon"}}};
        CHECK_THROWS_AS(scenario_from_json(j), ParseError);
    }
    SUBCASE("bad fill strategy") {
        auto j = minimal_config();
        j["adversaries"] = {{{"kind", "eavesdropper"}, {"fill", "wishful"}}};
        CHECK_THROWS_AS(scenario_from_json(j), ParseError);
    }
    SUBCASE("non-positive duration") {
        auto j = minimal_config();
        j["durationSec"] = 0.0;
        CHECK_THROWS_AS(scenario_from_json(j), ParseError);
    }
}

TEST_CASE("run_scenario is deterministic: byte-identical reports") {
    auto cfg = scenario_from_json(minimal_config());
    auto r1 = run_scenario(cfg);
    auto r2 = run_scenario(cfg);
    CHECK(report_json(r1).dump(2) == report_json(r2).dump(2));
    CHECK(report_csv_row(r1) == report_csv_row(r2));
    // and a different seed actually changes the outcome
    auto cfg2 = cfg;
    cfg2.master_seed = 8;
    auto r3 = run_scenario(cfg2);
    CHECK(report_json(r1).dump(2) != report_json(r3).dump(2));
}

TEST_CASE("scenario reports carry the pairing essentials") {
    auto cfg = scenario_from_json(minimal_config());
    auto r = run_scenario(cfg);
    auto j = report_json(r);
    CHECK(j.contains("accepted"));
    CHECK(j.contains("bmrAD"));
    CHECK(j.contains("bitsA"));
    CHECK(j.contains("adversaries"));
    std::string csv = report_csv_header() + report_csv_row(r);
    CHECK(csv.find("accepted") != std::string::npos);
    // header and exactly one data row
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("sweep rejects unknown parameters and empty value lists") {
    auto cfg = scenario_from_json(minimal_config());
    CHECK_THROWS_AS(sweep(cfg, "carrierHz", {1.0}), UnknownParam);
    CHECK_THROWS_AS(sweep(cfg, "lsbCount", {}), UnknownParam);
}

TEST_CASE("sweep visits values in ascending order and applies the selection rule") {
    auto cfg = scenario_from_json(minimal_config());
    auto rep = sweep(cfg, "lsbCount", {5.0, 3.0});
    REQUIRE(rep.points.size() == 2);
    CHECK(rep.points[0].value == doctest::Approx(3.0));
    CHECK(rep.points[1].value == doctest::Approx(5.0));
    if (rep.selection_found) {
        bool matches_a_point = false;
        for (const auto& p : rep.points) {
            if (p.value == rep.selected_value) {
                CHECK(p.result.bmr_ad < 0.2);
                matches_a_point = true;
            }
        }
        CHECK(matches_a_point);
    }
    auto j = sweep_report_json(rep);
    CHECK(j["param"] == "lsbCount");
    CHECK(j["points"].size() == 2);
}

TEST_CASE("CLI pair command writes reports and exits 0") {
    fs::path out = fresh_dir("pair");
    std::string cfg = std::string(JB_CONFIG_DIR) + "/room-b-artificial.json";
    int rc = run_cli("pair --config " + cfg + " --seed 3 --out " + out.string());
    CHECK(rc == 0);
    CHECK(fs::exists(out / "room-b-artificial_report.json"));
    CHECK(fs::exists(out / "room-b-artificial_report.csv"));
    auto j = nlohmann::json::parse(slurp(out / "room-b-artificial_report.json"));
    CHECK(j.contains("accepted"));
    CHECK(j["masterSeed"] == 3);
    fs::remove_all(out);
}

TEST_CASE("CLI is deterministic across runs with the same seed") {
    fs::path out1 = fresh_dir("det1");
    fs::path out2 = fresh_dir("det2");
    std::string cfg = std::string(JB_CONFIG_DIR) + "/room-b-artificial.json";
    REQUIRE(run_cli("pair --config " + cfg + " --seed 11 --out " + out1.string()) == 0);
    REQUIRE(run_cli("pair --config " + cfg + " --seed 11 --out " + out2.string()) == 0);
    CHECK(slurp(out1 / "room-b-artificial_report.json") ==
          slurp(out2 / "room-b-artificial_report.json"));
    CHECK(slurp(out1 / "room-b-artificial_report.csv") ==
          slurp(out2 / "room-b-artificial_report.csv"));
    fs::remove_all(out1);
    fs::remove_all(out2);
}

TEST_CASE("CLI reports config errors with exit code 2") {
    fs::path out = fresh_dir("bad");
    fs::path bad = out / "bad.json";
    std::ofstream(bad) << R"({"protocol": "bluetooth", "scene": {"nodes": []}})";
    CHECK(run_cli("pair --config " + bad.string() + " --out " + out.string()) == 2);
    // missing file is a config error too
    CHECK(run_cli("pair --config " + (out / "nope.json").string()) == 2);
    fs::remove_all(out);
}
