#include <doctest.h>

#include <algorithm>
#include <set>

#include "fixtures.hpp"
#include "gridfire/ambiguity.hpp"
#include "gridfire/synthetic.hpp"

using namespace gridfire;

TEST_CASE("mean bound") {
    const auto g = fixtures::two_bus();
    auto cfg = default_config(g, 1);
    cfg.gamma = {0.0011};
    cfg.beta = {3.0};
    CHECK(mean_bound(cfg, {0.02}).mu_upper[0] == doctest::Approx(0.0611));
    CHECK(mean_bound(cfg, {-0.02}).mu_upper[0] == doctest::Approx(0.0611));
    CHECK(mean_bound(cfg, {0.0}).mu_upper[0] == doctest::Approx(0.0011));
    cfg.beta = {0.0};
    CHECK(mean_bound(cfg, {1.7}).mu_upper[0] == doctest::Approx(0.0011));
    CHECK(mean_bound(cfg, {0.3}).full() == std::vector<double>{0.0011, 0.0});
}

TEST_CASE("support sizes and order") {
    CHECK(enumerate_support(5, 2).size() == 16);
    CHECK(enumerate_support(3, 3).size() == 8);
    CHECK(enumerate_support(57, 1).size() == 58);
    CHECK(support_size(57, 1) == 58);
    const auto s = enumerate_support(6, 3);
    CHECK(std::set<Scenario>(s.begin(), s.end()).size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(failures(s[i]) <= 3);
        if (i > 0) {
            const bool ordered = failures(s[i - 1]) < failures(s[i]) ||
                                 (failures(s[i - 1]) == failures(s[i]) && failed_set_less(s[i - 1], s[i]));
            CHECK(ordered);
        }
    }
    const auto k0 = enumerate_support(4, 0);
    REQUIRE(k0.size() == 1);
    CHECK(k0[0] == Scenario{1, 1, 1, 1});
    CHECK_THROWS_AS(enumerate_support(40, 10, 1000), SupportCapError);
}

TEST_CASE("two-scenario distribution LP pushes mass to the bound") {
    const std::vector<Scenario> scen = {{1}, {0}};
    const auto r = solve_distribution_lp({10.0, 110.0}, scen, {0.2});
    CHECK(r.value == doctest::Approx(30.0));
    CHECK(r.q[0] == doctest::Approx(0.8));
    CHECK(r.q[1] == doctest::Approx(0.2));
    CHECK(r.psi[0] == doctest::Approx(100.0));
    CHECK(r.phi == doctest::Approx(10.0));
    CHECK(0.2 * r.psi[0] + r.phi == doctest::Approx(30.0));
}

TEST_CASE("oracle degenerate cases equal the all-available recourse") {
    const auto g = random_radial_instance(6);
    const auto fs = solve_first_stage(g);
    const double h1 = evaluate_recourse(g, fs.z_sw, all_available(g)).cost;
    auto cfg = default_config(g, 2);
    CHECK(fixtures::close(worst_case_expectation_oracle(g, cfg, fs.z_sw, fs.f_p).value, h1));
    cfg = random_ddu_config(g, 3, 0);
    CHECK(fixtures::close(worst_case_expectation_oracle(g, cfg, fs.z_sw, fs.f_p).value, h1));
}

TEST_CASE("oracle properties on random feeders") {
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        const auto g = random_radial_instance(seed);
        const auto fs = solve_first_stage(g);
        const auto cfg = random_ddu_config(g, seed + 100, std::min<std::size_t>(2, g.num_lines()));
        const auto o = worst_case_expectation_oracle(g, cfg, fs.z_sw, fs.f_p);
        const double h1 = evaluate_recourse(g, fs.z_sw, all_available(g)).cost;
        CHECK(o.value >= h1 - 1e-6 * h1);
        const auto d = dualize_inner(o);
        CHECK(fixtures::close(d.dual_value, o.value));
        for (double p : d.psi) CHECK(p >= 0.0);
        const auto positive = std::count_if(o.q.begin(), o.q.end(), [](double q) { return q > 1e-9; });
        CHECK(static_cast<std::size_t>(positive) <= g.num_lines() + 1);

        auto bigger = cfg;
        for (auto& b : bigger.beta) b *= 2.0;
        CHECK(worst_case_expectation_oracle(g, bigger, fs.z_sw, fs.f_p).value >= o.value - 1e-6 * o.value);
    }
}

TEST_CASE("unit means over the full hypercube give the worst scenario") {
    const auto g = fixtures::triangle();
    auto cfg = default_config(g, 3);
    cfg.gamma.assign(3, 1.0);
    const Switching z{1, 1, 0};
    const auto o = worst_case_expectation_oracle(g, cfg, z, {0.2, 0.1, 0.0});
    double worst = 0.0;
    for (const auto& a : enumerate_support(3, 3)) worst = std::max(worst, evaluate_recourse(g, z, a).cost);
    CHECK(fixtures::close(o.value, worst));
}

TEST_CASE("config parsing") {
    const auto g = fixtures::triangle();
    const auto cfg = parse_ddu_config(
        R"({"gamma": 0.01, "beta": {"default": 0.5, "3": 2.0}, "k_budget": 1,
            "expansion_step": 0.01, "expansion_digits": [7, 7, 7]})",
        g);
    CHECK(cfg.beta == std::vector<double>{0.5, 0.5, 2.0});
    CHECK(cfg.gamma == std::vector<double>{0.01, 0.01, 0.01});
    CHECK(cfg.epsilon == 1e-4);
    CHECK(cfg.max_iterations == 500);
    CHECK_THROWS_AS(parse_ddu_config(R"({"gamma": 0})", g), ConfigError);
    CHECK_THROWS_AS(parse_ddu_config(R"({"k_budget": 1, "typo": 3})", g), ConfigError);
    CHECK_THROWS_AS(parse_ddu_config(R"({"k_budget": 4})", g), ConfigError);
    CHECK_THROWS_AS(parse_ddu_config(R"({"k_budget": 1, "beta": 1, "expansion_step": 0.01, "expansion_digits": 3})", g),
                    ConfigError);
    CHECK_THROWS_AS(parse_ddu_config(R"({"k_budget": 1, "beta": {"9": 1}})", g), ConfigError);
    CHECK_THROWS_AS(parse_ddu_config(R"({"k_budget": 1, "gamma": 1.5})", g), ConfigError);
}

TEST_CASE("config JSON round-trip and hash") {
    const auto g = random_radial_instance(8);
    const auto cfg = random_ddu_config(g, 8, 1);
    const auto back = parse_ddu_config(ddu_config_to_json(cfg, g), g);
    CHECK(config_hash(back, g) == config_hash(cfg, g));
    auto other = cfg;
    other.beta[0] += 0.25;
    CHECK(config_hash(other, g) != config_hash(cfg, g));
}
