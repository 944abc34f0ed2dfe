#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "gridfire/pre_contingency.hpp"
#include "gridfire/synthetic.hpp"

using namespace gridfire;

TEST_CASE("two-bus feeder within the line limit") {
    const auto g = fixtures::two_bus(1.0, 2.0);
    const auto s = solve_first_stage(g);
    CHECK(s.f_p[0] == doctest::Approx(1.0));
    CHECK(s.shed_p_minus[1] == doctest::Approx(0.0));
    CHECK(s.v_sq[1] == doctest::Approx(0.98));
    CHECK(s.v_sq[0] == doctest::Approx(1.0));
    CHECK(s.cost_energy == doctest::Approx(10.0));
    CHECK(s.cost_shed == doctest::Approx(0.0));
}

TEST_CASE("two-bus feeder above the line limit sheds the excess") {
    const auto g = fixtures::two_bus(1.0, 0.5);
    const auto s = solve_first_stage(g);
    CHECK(s.f_p[0] == doctest::Approx(0.5));
    CHECK(s.shed_p_minus[1] == doctest::Approx(0.5));
    CHECK(s.cost_shed == doctest::Approx(500.0));
    CHECK(s.total_cost() == doctest::Approx(505.0));
}

TEST_CASE("construction counts") {
    const auto g = random_radial_instance(3);
    milp::ModelBuilder m;
    const auto h = build_first_stage(g, m);
    CHECK(h.balance_rows == 2 * g.num_buses());
    CHECK(h.octagon_rows == 8 * g.num_lines());
    std::size_t vdrop_pairs = 0, vdrop_eq = 0;
    for (const auto& c : m.constraints()) {
        if (c.name.rfind("vdrop_up[", 0) == 0) ++vdrop_pairs;
        if (c.name.rfind("vdrop[", 0) == 0) ++vdrop_eq;
    }
    CHECK(vdrop_pairs == g.switchable_lines().size());
    CHECK(vdrop_eq == g.num_lines() - g.switchable_lines().size());
}

TEST_CASE("objective equals the cost breakdown") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto g = random_radial_instance(seed);
        milp::ModelBuilder m;
        const auto h = build_first_stage(g, m);
        const auto res = milp::solve(m);
        REQUIRE(res.optimal());
        const auto s = extract_first_stage(g, h, res);
        CHECK(fixtures::close(res.objective_value, s.total_cost()));
    }
}

TEST_CASE("first-stage invariants hold at the optimum") {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        const auto g = random_radial_instance(seed);
        const auto s = solve_first_stage(g);
        const auto z0 = initial_switching(g);
        for (std::size_t l = 0; l < g.num_lines(); ++l) {
            const double cap = s.z_sw[l] * g.lines[l].f_max + 1e-6;
            CHECK(std::abs(s.f_p[l]) <= cap);
            CHECK(std::abs(s.f_q[l]) <= cap);
            CHECK(s.y_sw[l] >= std::abs(s.z_sw[l] - z0[l]));
        }
        for (std::size_t b = 0; b < g.num_buses(); ++b) {
            const auto& bus = g.buses[b];
            CHECK(s.v_sq[b] >= bus.v_min * bus.v_min - 1e-6);
            CHECK(s.v_sq[b] <= bus.v_max * bus.v_max + 1e-6);
            CHECK(s.shed_p_minus[b] <= bus.demand_p + 1e-6);
            CHECK(s.shed_q_minus[b] <= bus.demand_q() + 1e-6);
            if (const auto k = g.substation_at(b)) CHECK(s.v_sq[b] == doctest::Approx(g.substations[*k].v_ref * g.substations[*k].v_ref));
        }
        CHECK_NOTHROW(check_switching(g, s.z_sw));
    }
}

TEST_CASE("open switchable lines carry no flow; unchanged statuses cost nothing") {
    const auto g = random_radial_instance(4);
    Switching open(g.num_lines(), 0);
    FirstStageOptions opt;
    opt.fixed_z = open;
    const auto s = solve_first_stage(g, opt);
    for (std::size_t l : g.switchable_lines()) {
        CHECK(s.f_p[l] == doctest::Approx(0.0));
        CHECK(s.f_q[l] == doctest::Approx(0.0));
    }
    opt.fixed_z = initial_switching(g);
    const auto s0 = solve_first_stage(g, opt);
    for (int y : s0.y_sw) CHECK(y == 0);
    CHECK(s0.cost_switch == 0.0);
}

TEST_CASE("closing a forbidden pattern is a precondition violation") {
    auto g = fixtures::triangle();
    g.forbidden_patterns = generate_radiality_rules(g);
    FirstStageOptions opt;
    opt.fixed_z = Switching{1, 1, 1};
    CHECK_THROWS_AS(solve_first_stage(g, opt), PreconditionError);
    CHECK_THROWS_AS(check_switching(g, Switching{1, 1}), PreconditionError);
}

TEST_CASE("octagon lies between the discs of radius F cos(pi/8) and F") {
    const double f = 0.7;
    const auto& sec = octagon_sectors();
    auto inside = [&](double p, double q) {
        for (const auto& s : sec)
            for (double sign : {1.0, -1.0})
                if (sign * q - s.slope * p > f * s.offset + 1e-12) return false;
        return true;
    };
    const double inner = f * std::cos(std::numbers::pi / 8.0);
    for (int k = 0; k < 3600; ++k) {
        const double t = 2.0 * std::numbers::pi * k / 3600.0;
        CHECK(inside(inner * std::cos(t), inner * std::sin(t)));
        CHECK_FALSE(inside(1.0001 * f * std::cos(t), 1.0001 * f * std::sin(t)));
        // Largest radius along t that stays inside the octagon.
        double lo = 0.0, hi = 2.0 * f;
        for (int i = 0; i < 60; ++i) {
            const double mid = 0.5 * (lo + hi);
            (inside(mid * std::cos(t), mid * std::sin(t)) ? lo : hi) = mid;
        }
        CHECK(lo <= f * (1.0 + 1e-9));
        CHECK(lo >= inner * (1.0 - 1e-9));
    }
    // Vertices sit on the outer circle.
    for (int v = 0; v < 8; ++v) {
        const double t = v * std::numbers::pi / 4.0;
        CHECK(inside(f * std::cos(t) * (1 - 1e-9), f * std::sin(t) * (1 - 1e-9)));
    }
}

TEST_CASE("voltage big-M formula") {
    const auto g = fixtures::two_bus();
    CHECK(voltage_big_m(g, 0) == doctest::Approx((1.21 - 0.81) + 2.0 * 0.02 * 2.0));
}

TEST_CASE("closed switch behaves like a fixed line") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto g = random_radial_instance(seed);
        if (g.switchable_lines().empty()) continue;
        const auto base = solve_first_stage(g);
        for (std::size_t l : g.switchable_lines()) {
            if (!base.z_sw[l]) continue;
            GridInstance h = g;
            h.lines[l].switchable = false;
            h.lines[l].switch_cost = 0.0;
            h.forbidden_patterns.clear();
            FirstStageOptions a, b;
            a.fixed_z = base.z_sw;
            b.fixed_z = base.z_sw;
            const auto sa = solve_first_stage(g, a);
            const auto sb = solve_first_stage(h, b);
            CHECK(fixtures::close(sa.cost_energy + sa.cost_shed, sb.cost_energy + sb.cost_shed));
        }
    }
}
