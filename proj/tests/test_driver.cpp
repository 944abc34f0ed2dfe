#include <doctest.h>

#include <filesystem>

#include "fixtures.hpp"
#include "gridfire/driver.hpp"
#include "gridfire/synthetic.hpp"

using namespace gridfire;

TEST_CASE("empty budget converges after one cut") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto g = random_radial_instance(seed);
        const auto cfg = random_ddu_config(g, seed, 0);
        const auto r = solve_ddro(g, cfg);
        CHECK(r.converged);
        CHECK(r.iterations == 1);
        const auto& fs = r.solution.first_stage;
        const double h1 = evaluate_recourse(g, fs.z_sw, all_available(g)).cost;
        CHECK(fixtures::close(r.upper_bound - fs.total_cost(), h1));
    }
}

TEST_CASE("bounds are monotone and the final value matches the oracle") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const auto g = random_radial_instance(seed);
        const auto cfg = random_ddu_config(g, seed * 7 + 1, 1);
        const auto r = solve_ddro(g, cfg);
        REQUIRE(r.converged);
        for (std::size_t i = 0; i < r.log.size(); ++i) {
            const auto& e = r.log[i];
            CHECK(e.lb <= e.best_ub + 1e-6 * std::max(1.0, e.best_ub));
            if (i > 0) {
                CHECK(e.lb >= r.log[i - 1].lb);
                CHECK(e.best_ub <= r.log[i - 1].best_ub);
            }
        }
        const auto& fs = r.solution.first_stage;
        const double ref = fs.total_cost() + worst_case_expectation_oracle(g, cfg, fs.z_sw, fs.f_p).value;
        CHECK(std::abs(r.upper_bound - ref) <= cfg.epsilon * std::max(1.0, ref));
    }
}

TEST_CASE("iteration cap returns the incumbent unconverged") {
    const auto g = random_radial_instance(4);
    auto cfg = random_ddu_config(g, 29, 2);
    cfg.max_iterations = 1;
    const auto r = solve_ddro(g, cfg);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 1);
    CHECK(r.gap > cfg.epsilon);
    CHECK(r.log.size() == 2);  // iteration 0 is the cut-free master
    CHECK(r.upper_bound == r.log.back().best_ub);
}

TEST_CASE("cut cache round-trip is byte-identical") {
    const auto g = random_radial_instance(3);
    const auto cfg = random_ddu_config(g, 3, 1);
    const auto r = solve_ddro(g, cfg);
    const auto dir = std::filesystem::temp_directory_path();
    save_cuts(g, r.cuts, dir / "gridfire_cuts_a.json", "abc");
    const auto loaded = load_cuts(g, dir / "gridfire_cuts_a.json");
    REQUIRE(loaded.size() == r.cuts.size());
    save_cuts(g, loaded, dir / "gridfire_cuts_b.json", "abc");
    CHECK(cuts_to_json(g, loaded, "abc") == cuts_to_json(g, r.cuts, "abc"));
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        CHECK(loaded[i].scenario == r.cuts[i].scenario);
        CHECK(loaded[i].dual.eta == r.cuts[i].dual.eta);
    }
    std::filesystem::remove(dir / "gridfire_cuts_a.json");
    std::filesystem::remove(dir / "gridfire_cuts_b.json");
}

TEST_CASE("foreign cut cache is refused") {
    const auto g = random_radial_instance(3);
    const auto text = cuts_to_json(g, {});
    CHECK_THROWS_AS(cuts_from_json(random_radial_instance(4), text), SignatureError);
    CHECK_THROWS_AS(cuts_from_json(g, "{\"format\": \"other\"}"), ConfigError);
}

TEST_CASE("zero-risk cuts seed a risk-aware run") {
    const auto g = wildfire_bypass_instance();
    auto cold_cfg = default_config(g, 1);
    cold_cfg.expansion_step = 0.01;
    cold_cfg.expansion_digits.assign(g.num_lines(), 6);
    const auto base = solve_ddro(g, cold_cfg);
    auto risky = cold_cfg;
    risky.beta[2] = 0.15;
    const auto cold = solve_ddro(g, risky);
    const auto warm = solve_ddro(g, risky, base.cuts);
    CHECK(warm.warm_cut_count == base.cuts.size());
    CHECK(std::abs(warm.upper_bound - cold.upper_bound) <= risky.epsilon * cold.upper_bound);
    CHECK(warm.iterations <= cold.iterations);
    for (const auto& c : base.cuts)
        CHECK(cold.solution.phi >= evaluate_cut(g, c, cold.solution.first_stage.z_sw, cold.solution.psi) - 1e-6);
}

TEST_CASE("iteration log CSV") {
    IterationLog e;
    e.iteration = 2;
    e.lb = 1.5;
    e.ub = 3.0;
    e.best_ub = 2.0;
    e.gap = 0.25;
    e.scenario_added = {1, 0, 0};
    e.seconds = 0.5;
    CHECK(iteration_log_csv({e}) == "iteration,lb,ub,gap,seconds,best_ub,failed_line_indices\n2,1.5,3,0.25,0.5,2,1 2\n");
}
