#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "gridfire/master.hpp"
#include "gridfire/subproblem.hpp"
#include "gridfire/synthetic.hpp"

using namespace gridfire;

TEST_CASE("empty-cut master with zero risk equals the first-stage optimum") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const auto g = random_radial_instance(seed);
        const auto cfg = default_config(g, 1);
        const auto m = solve_master(g, cfg, {});
        CHECK(m.phi == doctest::Approx(0.0));
        CHECK(fixtures::close(m.objective, solve_first_stage(g).total_cost()));
    }
}

TEST_CASE("a cut from a zero dual on the all-available scenario is phi >= 0") {
    const auto g = random_radial_instance(2);
    const OptimalityCut cut{1, all_available(g), DualSolution::zeros(g)};
    const auto f = cut_form(g, cut);
    CHECK(f.constant == 0.0);
    CHECK(f.failed.empty());
    for (double c : f.z_coef) CHECK(c == 0.0);
    std::vector<double> psi(2 * g.num_lines(), 3.0);
    CHECK(evaluate_cut(g, cut, initial_switching(g), psi) == 0.0);
}

TEST_CASE("trailing psi term of a cut") {
    const auto g = fixtures::triangle();
    OptimalityCut cut{1, Scenario{0, 1, 1}, DualSolution::zeros(g)};
    std::vector<double> psi{7.0, 0.0, 0.0, 2.0, 0.0, 0.0};
    CHECK(evaluate_cut(g, cut, Switching{1, 1, 0}, psi) == doctest::Approx(-5.0));
    psi[1] += 40.0;  // line 2 is available in the cut's scenario
    CHECK(evaluate_cut(g, cut, Switching{1, 1, 0}, psi) == doctest::Approx(-5.0));
}

TEST_CASE("binary expansion encodes a flow of 0.53 as 1+4+16+32") {
    const auto g = fixtures::two_bus(0.53, 1.0);
    auto cfg = default_config(g, 1);
    cfg.expansion_step = 0.01;
    cfg.expansion_digits = {7};
    cfg.gamma = {0.01};
    cfg.beta = {1.0};
    const auto m = solve_master(g, cfg, {});
    REQUIRE(m.expanded[0]);
    CHECK(m.first_stage.f_p[0] == doctest::Approx(0.53));
    CHECK(m.delta[0] == std::vector<int>{1, 0, 1, 0, 1, 1, 0});
    CHECK(m.decoded_flow(0, 0.01) == doctest::Approx(0.53));
}

TEST_CASE("expansion that cannot span the flow limit is a configuration error") {
    const auto g = fixtures::two_bus(0.5, 1.0);
    auto cfg = default_config(g, 1);
    cfg.expansion_step = 0.01;
    cfg.expansion_digits = {6};  // spans 0.63 < 1.0
    cfg.beta = {1.0};
    milp::ModelBuilder m;
    CHECK_THROWS_AS(build_master(g, cfg, {}, m), ConfigError);
}

TEST_CASE("psi big-M bounds the recourse cost range") {
    const auto g = fixtures::two_bus(1.0, 2.0);
    CHECK(default_psi_big_m(g) == doctest::Approx(1000.0 * 1.0 + 10.0 * 5.0));
}

TEST_CASE("cuts are tight at their generating point and linearization holds") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const auto g = random_radial_instance(seed);
        const auto cfg = random_ddu_config(g, seed, 1);
        std::vector<OptimalityCut> cuts;
        for (int it = 1; it <= 3; ++it) {
            const auto m = solve_master(g, cfg, cuts);
            for (std::size_t l = 0; l < g.num_lines(); ++l) {
                const double exact = m.psi[l] * std::abs(m.first_stage.f_p[l]);
                CHECK(std::abs(m.chi[l] - exact) <= m.psi[l] * cfg.expansion_step + 1e-6);
                if (m.expanded[l]) {
                    CHECK(m.decoded_flow(l, cfg.expansion_step) == doctest::Approx(std::abs(m.first_stage.f_p[l])));
                    for (std::size_t e = 0; e < m.delta[l].size(); ++e)
                        CHECK(std::abs(m.rho[l][e] - m.psi[l] * m.delta[l][e]) <= 1e-6 * std::max(1.0, m.psi[l]));
                }
            }
            for (const auto& c : cuts)
                CHECK(m.phi >= evaluate_cut(g, c, m.first_stage.z_sw, m.psi) - 1e-6 * std::max(1.0, m.phi));
            const auto sub = solve_subproblem(g, cfg, m.first_stage.z_sw, m.psi);
            const OptimalityCut cut{it, sub.scenario, sub.dual};
            CHECK(fixtures::close(evaluate_cut(g, cut, m.first_stage.z_sw, m.psi), sub.objective));
            cuts.push_back(cut);
        }
    }
}

TEST_CASE("fixing the lower moment weights") {
    const auto g = random_radial_instance(3);
    auto cfg = random_ddu_config(g, 3, 1);
    cfg.fix_psi_lower = true;
    const auto m = solve_master(g, cfg, {});
    for (std::size_t l = 0; l < g.num_lines(); ++l) CHECK(m.psi[g.num_lines() + l] == 0.0);
}
