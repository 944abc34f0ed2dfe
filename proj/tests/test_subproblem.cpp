#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "gridfire/master.hpp"
#include "gridfire/subproblem.hpp"
#include "gridfire/synthetic.hpp"

using namespace gridfire;

namespace {

std::vector<double> random_psi(const GridInstance& g, std::mt19937_64& rng, double scale) {
    std::uniform_real_distribution<double> u(0.0, scale);
    std::vector<double> psi(2 * g.num_lines());
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = i < g.num_lines() ? u(rng) : 0.1 * u(rng);
    return psi;
}

}  // namespace

TEST_CASE("empty budget returns the all-available scenario") {
    const auto g = random_radial_instance(4);
    const auto cfg = default_config(g, 0);
    const auto z = solve_first_stage(g).z_sw;
    std::vector<double> psi(2 * g.num_lines(), 5.0);
    const auto s = solve_subproblem(g, cfg, z, psi);
    CHECK(s.scenario == all_available(g));
    CHECK(fixtures::close(s.objective, evaluate_recourse(g, z, all_available(g)).cost));
}

TEST_CASE("huge weights make every failure unprofitable") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const auto g = random_radial_instance(seed);
        const auto cfg = default_config(g, 2);
        const auto z = solve_first_stage(g).z_sw;
        std::vector<double> psi(2 * g.num_lines(), 0.0);
        for (std::size_t l = 0; l < g.num_lines(); ++l) psi[l] = 10.0 * default_psi_big_m(g);
        CHECK(solve_subproblem(g, cfg, z, psi).scenario == all_available(g));
        auto en = cfg;
        en.enumerate_subproblem = true;
        CHECK(solve_subproblem(g, en, z, psi).scenario == all_available(g));
    }
}

TEST_CASE("dualized MILP matches support enumeration") {
    std::mt19937_64 rng(99);
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        const auto g = random_radial_instance(seed);
        for (std::size_t k = 1; k <= 2; ++k) {
            auto cfg = random_ddu_config(g, seed, k);
            const auto z = solve_first_stage(g).z_sw;
            const auto psi = random_psi(g, rng, 300.0);
            const auto milp_sol = solve_subproblem(g, cfg, z, psi);
            cfg.enumerate_subproblem = true;
            const auto enum_sol = solve_subproblem(g, cfg, z, psi);
            CHECK_MESSAGE(fixtures::close(milp_sol.objective, enum_sol.objective),
                          "seed " << seed << " K " << k << ": " << milp_sol.objective << " vs " << enum_sol.objective);
            CHECK(in_support(g, milp_sol.scenario, k));
            // Primal-dual consistency of the returned pair.
            const auto r = evaluate_recourse(g, z, milp_sol.scenario);
            CHECK(fixtures::close(r.cost, milp_sol.recourse_cost));
            CHECK(fixtures::close(dual_objective(g, milp_sol.dual, z, milp_sol.scenario) - psi_penalty(psi, milp_sol.scenario),
                                  milp_sol.objective));
        }
    }
}

TEST_CASE("enumeration breaks ties toward the smallest failed set") {
    GridInstance g;
    g.loss_cost = 1000.0;
    g.buses = {fixtures::bus(1, 0.0, 1.0, true), fixtures::bus(2, 0.2), fixtures::bus(3, 0.2)};
    g.substations = {fixtures::substation(1, 10.0)};
    g.lines = {fixtures::line(1, 1, 2, 1.0), fixtures::line(2, 1, 3, 1.0)};
    auto cfg = default_config(g, 1);
    cfg.enumerate_subproblem = true;
    const auto s = solve_subproblem(g, cfg, Switching{1, 1}, std::vector<double>(4, 0.0));
    CHECK(s.scenario == Scenario{0, 1});
}

TEST_CASE("too small a dual bound is reported") {
    const auto g = random_radial_instance(2);
    auto cfg = default_config(g, 1);
    cfg.dual_big_m = 1e-4;
    const auto z = solve_first_stage(g).z_sw;
    CHECK_THROWS_AS(solve_subproblem(g, cfg, z, std::vector<double>(2 * g.num_lines(), 0.0)), CalibrationError);
}

TEST_CASE("psi penalty") {
    CHECK(psi_penalty({5.0, 1.0, 2.0, 0.5}, Scenario{0, 1}) == doctest::Approx(3.0));
    CHECK(psi_penalty({5.0, 1.0, 2.0, 0.5}, Scenario{1, 1}) == 0.0);
}
