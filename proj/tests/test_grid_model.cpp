#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "fixtures.hpp"
#include "gridfire/grid_model.hpp"
#include "gridfire/synthetic.hpp"

using namespace gridfire;

namespace {

const char* kTwoBus = R"({
  "base_mva": 10,
  "loss_cost": 1000,
  "buses": [
    {"id": 1, "demand_p": 0.0, "power_factor": 1.0, "v_min": 0.9, "v_max": 1.1, "is_substation": true},
    {"id": 2, "demand_p": 1.0, "power_factor": 1.0, "v_min": 0.9, "v_max": 1.1}
  ],
  "lines": [{"id": 1, "from_bus": 1, "to_bus": 2, "r": 0.01, "x": 0.01, "f_max": 2.0}],
  "substations": [{"bus": 1, "p_max": 5, "q_min": -5, "q_max": 5, "energy_cost": 10, "v_ref": 1.0}]
})";

}  // namespace

TEST_CASE("minimal two-bus document parses") {
    const auto g = parse_instance(kTwoBus);
    CHECK(g.num_buses() == 2);
    CHECK(g.num_lines() == 1);
    CHECK(g.base_mva == 10.0);
    CHECK(g.forbidden_patterns.empty());
}

TEST_CASE("dangling bus reference names the line") {
    std::string text = kTwoBus;
    text.replace(text.find("\"to_bus\": 2"), 11, "\"to_bus\": 99");
    try {
        parse_instance(text);
        FAIL("expected an InstanceError");
    } catch (const InstanceError& e) {
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
        CHECK(std::string(e.what()).find("99") != std::string::npos);
    }
}

TEST_CASE("schema violations are rejected") {
    CHECK_THROWS_AS(parse_instance("[]"), InstanceError);
    CHECK_THROWS_AS(parse_instance("{\"loss_cost\": 1}"), InstanceError);
    auto g = fixtures::two_bus();
    g.buses[1].power_factor = 0.0;
    CHECK_THROWS_AS(g.validate(), InstanceError);
    g = fixtures::two_bus();
    g.substations.clear();
    CHECK_THROWS_AS(g.validate(), InstanceError);
}

TEST_CASE("reactive demand derives from the power factor") {
    auto b = fixtures::bus(2, 0.1, 0.95);
    CHECK(b.demand_q() == doctest::Approx(0.1 * std::tan(std::acos(0.95))));
    CHECK(fixtures::bus(3, 0.4, 1.0).demand_q() == doctest::Approx(0.0));
}

TEST_CASE("triangle of switchable lines yields a single rule") {
    const auto rules = generate_radiality_rules(fixtures::triangle());
    REQUIRE(rules.size() == 1);
    CHECK(rules[0] == ForbiddenPattern{0, 1, 2});
}

TEST_CASE("radial feeder without switches has no rules") {
    GridInstance g = fixtures::two_bus();
    g.buses.push_back(fixtures::bus(3, 0.1));
    g.lines.push_back(fixtures::line(2, 2, 3, 1.0));
    CHECK(generate_radiality_rules(g).empty());
}

TEST_CASE("cyclic fixed network is unrepairable") {
    GridInstance g = fixtures::triangle();
    for (auto& l : g.lines) l.switchable = false;
    CHECK_THROWS_AS(generate_radiality_rules(g), UnrepairableCycleError);
    CHECK_THROWS_AS(g.validate(), UnrepairableCycleError);
}

TEST_CASE("rules characterise acyclic topologies exactly") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const GridInstance g = random_radial_instance(seed);
        const auto rules = generate_radiality_rules(g);
        const auto sw = g.switchable_lines();
        REQUIRE(sw.size() <= 12);
        for (std::size_t mask = 0; mask < (std::size_t{1} << sw.size()); ++mask) {
            std::vector<bool> closed(g.num_lines(), true);
            for (std::size_t i = 0; i < sw.size(); ++i) closed[sw[i]] = (mask >> i) & 1U;
            bool violates = false;
            for (const auto& r : rules) {
                bool all = true;
                for (std::size_t l : r) all = all && closed[l];
                violates = violates || all;
            }
            CHECK_MESSAGE(violates == has_cycle(g, closed), "seed " << seed << " mask " << mask);
        }
    }
}

TEST_CASE("rule generation is deterministic") {
    const auto g = random_radial_instance(11);
    CHECK(generate_radiality_rules(g) == generate_radiality_rules(g));
}

TEST_CASE("annual failure rate to 24 hour probability") {
    CHECK(std::abs(100.0 * annual_rate_to_horizon_probability(0.4, 24.0) - 0.11) <= 0.005);
    CHECK(std::abs(100.0 * annual_rate_to_horizon_probability(0.15, 24.0) - 0.0411) <= 0.005);
    CHECK(annual_rate_to_horizon_probability(0.0, 24.0) == 0.0);
    CHECK_THROWS_AS(annual_rate_to_horizon_probability(-1.0, 24.0), std::invalid_argument);
    CHECK_THROWS_AS(annual_rate_to_horizon_probability(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("save and load round-trip") {
    const auto g = random_radial_instance(5);
    const auto path = std::filesystem::temp_directory_path() / "gridfire_roundtrip.json";
    save_instance(g, path);
    const auto h = load_instance(path);
    CHECK(instance_to_json(g) == instance_to_json(h));
    CHECK(instance_signature(g) == instance_signature(h));
    std::filesystem::remove(path);
}

TEST_CASE("signature tracks topology") {
    auto g = fixtures::triangle();
    const auto s0 = instance_signature(g);
    g.lines[2].to_bus = 2;
    CHECK_FALSE(instance_signature(g) == s0);
    g = fixtures::triangle();
    g.buses[1].demand_p = 0.3;
    CHECK(instance_signature(g) == s0);
}
