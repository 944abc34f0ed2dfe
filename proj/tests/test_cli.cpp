#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fixtures.hpp"
#include "gridfire/cli.hpp"

namespace fs = std::filesystem;
using fixtures::data_path;
using gridfire::run_cli;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

nlohmann::json read_json(const fs::path& p) {
    std::ifstream in(p);
    return nlohmann::json::parse(in);
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("gridfire_cli_" + name);
    fs::remove_all(d);
    return d;
}

}  // namespace

TEST_CASE("solve, warm start and simulate on the bypass feeder") {
    const auto d = scratch("solve");
    const auto inst = data_path("bypass6.json");
    auto r = cli({"solve", "--instance", inst, "--ddu", data_path("bypass6_beta0.json"), "--out", (d / "b0").string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    auto s0 = read_json(d / "b0" / "solution.json");
    CHECK(s0["switching_actions"] == 0);

    r = cli({"solve", "--instance", inst, "--ddu", data_path("bypass6_ddu.json"), "--out", (d / "b1").string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    auto s1 = read_json(d / "b1" / "solution.json");
    CHECK(s1["switching_actions"] == 1);
    CHECK(s1["switching"][4]["action"] == "close");
    const double total = s1["costs"]["total"];
    const double parts = s1["costs"]["energy"].get<double>() + s1["costs"]["switching"].get<double>() +
                         s1["costs"]["deficit"].get<double>() + s1["costs"]["worst_case_expected_value"].get<double>();
    CHECK(total == doctest::Approx(parts));
    CHECK(s1["provenance"]["config_hash"].is_string());
    CHECK(read_text(d / "b1" / "iterations.csv").rfind("# config_hash=", 0) == 0);

    r = cli({"solve", "--instance", inst, "--ddu", data_path("bypass6_ddu.json"), "--warm-start",
             (d / "b0" / "cuts.json").string(), "--out", (d / "warm").string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    auto sw = read_json(d / "warm" / "solution.json");
    CHECK(sw["switching"] == s1["switching"]);
    CHECK(sw["costs"]["total"].get<double>() == doctest::Approx(total).epsilon(1e-4));

    std::vector<double> means;
    for (const char* tag : {"b0", "b1"}) {
        r = cli({"simulate", "--instance", inst, "--ddu", data_path("bypass6_ddu.json"), "--solution",
                 (d / tag / "solution.json").string(), "--samples", "2000", "--seed", "5", "--out",
                 (d / (std::string("sim_") + tag)).string()});
        REQUIRE_MESSAGE(r.code == 0, r.err);
        auto summary = read_json(d / (std::string("sim_") + tag) / "summary.json");
        means.push_back(summary["mean_loss_pct"]);
        CHECK(summary["cvar95_loss_pct"].get<double>() >= summary["mean_loss_pct"].get<double>());
    }
    CHECK(means[0] > means[1]);

    r = cli({"simulate", "--instance", inst, "--ddu", data_path("bypass6_ddu.json"), "--switching", "11110",
             "--samples", "1", "--out", (d / "one").string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    std::istringstream rows(read_text(d / "one" / "scenarios.csv"));
    std::string line;
    int count = 0;
    while (std::getline(rows, line)) ++count;
    CHECK(count == 3);  // provenance comment, header, one scenario
    fs::remove_all(d);
}

TEST_CASE("oracle mode") {
    const auto d = scratch("oracle");
    auto r = cli({"oracle", "--instance", data_path("bypass6.json"), "--ddu", data_path("bypass6_ddu.json"), "--out",
                  d.string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    auto o = read_json(d / "oracle.json");
    CHECK(o["within_tolerance"] == true);
    CHECK(std::abs(o["difference"].get<double>()) <= 1e-4 * o["oracle_value"].get<double>());

    std::ofstream(d / "k0.json") << R"({"gamma": 0.01, "beta": 0.5, "k_budget": 0, "expansion_step": 0.01, "expansion_digits": 6})";
    r = cli({"oracle", "--instance", data_path("bypass6.json"), "--ddu", (d / "k0.json").string(), "--out", d.string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    o = read_json(d / "oracle.json");
    CHECK(o["oracle_worst_case_expectation"].get<double>() ==
          doctest::Approx(o["recourse_all_available"].get<double>()));

    std::ofstream(d / "cap.json") << R"({"k_budget": 3, "support_cap": 10, "expansion_step": 0.01, "expansion_digits": 6})";
    r = cli({"oracle", "--instance", data_path("bypass6.json"), "--ddu", (d / "cap.json").string(), "--out", d.string()});
    CHECK(r.code == 7);
    auto err = nlohmann::json::parse(r.err);
    CHECK(err["error"] == "support_cap");
    CHECK(err["message"].get<std::string>().find("refusing") != std::string::npos);
    fs::remove_all(d);
}

TEST_CASE("rules mode") {
    const auto d = scratch("rules");
    auto r = cli({"rules", "--instance", data_path("feeder11.json"), "--out", d.string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    auto j = read_json(d / "rules.json");
    CHECK(j["instance_rules_match"] == true);
    CHECK(j["provenance"]["config_hash"].is_null());
    fs::remove_all(d);
}

TEST_CASE("failures are reported as JSON with a nonzero status") {
    const auto d = scratch("errors");
    auto r = cli({"solve", "--instance", "/nonexistent.json", "--ddu", data_path("bypass6_ddu.json"), "--out", d.string()});
    CHECK(r.code == 2);
    CHECK(nlohmann::json::parse(r.err)["error"] == "usage");

    r = cli({"simulate", "--instance", data_path("bypass6.json"), "--ddu", data_path("bypass6_ddu.json"), "--out",
             d.string()});
    CHECK(r.code == 2);
    CHECK(nlohmann::json::parse(r.err)["message"].get<std::string>().find("--solution") != std::string::npos);

    r = cli({"solve", "--instance", data_path("bypass6.json"), "--ddu", data_path("bypass6_beta0.json"), "--out",
             (d / "b0").string()});
    REQUIRE(r.code == 0);
    r = cli({"solve", "--instance", data_path("feeder11.json"), "--ddu", data_path("feeder11_ddu.json"), "--warm-start",
             (d / "b0" / "cuts.json").string(), "--out", d.string()});
    CHECK(r.code == 4);
    CHECK(nlohmann::json::parse(r.err)["error"] == "signature");

    std::ofstream(d / "bad.json") << R"({"k_budget": 1, "gamma": 2})";
    r = cli({"solve", "--instance", data_path("bypass6.json"), "--ddu", (d / "bad.json").string(), "--out", d.string()});
    CHECK(r.code == 2);
    CHECK(nlohmann::json::parse(r.err)["error"] == "config");

    r = cli({"simulate", "--instance", data_path("feeder11.json"), "--ddu", data_path("feeder11_ddu.json"),
             "--switching", "11111111111", "--out", d.string()});
    CHECK(r.code == 3);
    CHECK(nlohmann::json::parse(r.err)["error"] == "precondition");
    fs::remove_all(d);
}
