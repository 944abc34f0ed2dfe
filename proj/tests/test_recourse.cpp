#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "gridfire/recourse.hpp"
#include "gridfire/synthetic.hpp"

using namespace gridfire;

namespace {

// Feasible switching vectors of g, in mask order over the switchable lines.
std::vector<Switching> feasible_switchings(const GridInstance& g) {
    const auto sw = g.switchable_lines();
    std::vector<Switching> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << sw.size()); ++mask) {
        Switching z(g.num_lines(), 1);
        for (std::size_t i = 0; i < sw.size(); ++i) z[sw[i]] = (mask >> i) & 1U;
        try {
            check_switching(g, z);
            out.push_back(z);
        } catch (const PreconditionError&) {
        }
    }
    return out;
}

}  // namespace

TEST_CASE("all lines in service reproduces the first-stage operating cost") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto g = random_radial_instance(seed);
        const auto s = solve_first_stage(g);
        const auto r = evaluate_recourse(g, s.z_sw, all_available(g));
        CHECK(fixtures::close(r.cost, s.cost_energy + s.cost_shed));
    }
}

TEST_CASE("failed single line sheds the whole load") {
    const auto g = fixtures::two_bus(1.0, 2.0);
    const auto r = evaluate_recourse(g, Switching{1}, Scenario{0});
    CHECK(r.cost == doctest::Approx(1000.0));
    CHECK(r.f_p[0] == doctest::Approx(0.0));
    CHECK(r.shed_p_total() == doctest::Approx(1.0));
}

TEST_CASE("zero dual evaluates to zero") {
    const auto g = random_radial_instance(2);
    CHECK(dual_objective(g, DualSolution::zeros(g), initial_switching(g), all_available(g)) == 0.0);
}

TEST_CASE("duals reproduce the primal cost and stay sign-feasible") {
    std::mt19937_64 rng(5);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto g = random_radial_instance(seed);
        const auto zs = feasible_switchings(g);
        for (int trial = 0; trial < 5; ++trial) {
            const Switching& z = zs[rng() % zs.size()];
            Scenario a(g.num_lines());
            for (auto& v : a) v = (rng() % 4) != 0;
            const auto r = evaluate_recourse(g, z, a);
            CHECK(fixtures::close(dual_objective(g, r.dual, z, a), r.cost));
            CHECK(fixtures::close(dual_affine_in_z(g, r.dual, a).at(z), r.cost));
            for (int k = 1; k <= kEtaClasses; ++k)
                if (!DualSolution::is_equality(k))
                    for (double v : r.dual.eta[k]) CHECK(v >= 0.0);
        }
    }
}

TEST_CASE("a dual from one switching bounds the cost at another") {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        const auto g = random_radial_instance(seed);
        const auto zs = feasible_switchings(g);
        Scenario a = all_available(g);
        a[seed % g.num_lines()] = 0;
        const auto r = evaluate_recourse(g, zs.front(), a);
        for (const auto& z : zs) {
            const double h = evaluate_recourse(g, z, a).cost;
            CHECK(dual_objective(g, r.dual, z, a) <= h + 1e-6 * std::max(1.0, h));
        }
    }
}

TEST_CASE("losing a line never lowers the cost") {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        const auto g = random_radial_instance(seed);
        const auto z = solve_first_stage(g).z_sw;
        const double base = evaluate_recourse(g, z, all_available(g)).cost;
        for (std::size_t l = 0; l < g.num_lines(); ++l) {
            Scenario a = all_available(g);
            a[l] = 0;
            CHECK(evaluate_recourse(g, z, a).cost >= base - 1e-6 * std::max(1.0, base));
        }
    }
}

TEST_CASE("closing an allowed switch never raises the cost") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const auto g = random_radial_instance(seed);
        const auto sw = g.switchable_lines();
        if (sw.empty() || sw.size() > 4) continue;
        const auto zs = feasible_switchings(g);
        for (const auto& z : zs)
            for (std::size_t l : sw) {
                if (z[l]) continue;
                Switching zc = z;
                zc[l] = 1;
                if (std::find(zs.begin(), zs.end(), zc) == zs.end()) continue;
                Scenario a = all_available(g);
                a[sw.front()] = 0;
                const double open = evaluate_recourse(g, z, a).cost;
                const double closed = evaluate_recourse(g, zc, a).cost;
                CHECK(closed <= open + 1e-6 * std::max(1.0, open));
            }
    }
}

TEST_CASE("support membership") {
    const auto g = fixtures::triangle();
    CHECK(in_support(g, Scenario{1, 1, 1}, 0));
    CHECK_FALSE(in_support(g, Scenario{0, 1, 1}, 0));
    CHECK(in_support(g, Scenario{0, 1, 0}, 2));
    CHECK_FALSE(in_support(g, Scenario{1, 1}, 2));
    CHECK_FALSE(in_support(g, Scenario{1, 2, 1}, 2));
}

TEST_CASE("scenario bit strings") {
    CHECK(scenario_bits(Scenario{1, 0, 1}) == "101");
    CHECK(scenario_from_bits("0110") == Scenario{0, 1, 1, 0});
    CHECK(failures(Scenario{0, 1, 0}) == 2);
}
