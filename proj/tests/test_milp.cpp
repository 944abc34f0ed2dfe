#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gridfire/milp.hpp"

using namespace gridfire::milp;

TEST_CASE("one-variable LP reports objective and shadow price") {
    ModelBuilder m;
    m.set_sense(Sense::maximize);
    const auto x = m.add_continuous("x", -kInf, kInf);
    m.add_objective(x, 1.0);
    const auto r = m.add_constraint("cap", LinearExpr{}.add(x, 1.0), Relation::less_equal, 3.0);
    const auto res = solve(m);
    REQUIRE(res.optimal());
    CHECK(res.objective_value == doctest::Approx(3.0));
    CHECK(res.value(x) == doctest::Approx(3.0));
    REQUIRE(res.has_duals());
    CHECK(res.dual(r) == doctest::Approx(1.0));
    CHECK(dual_objective(m, res) == doctest::Approx(3.0));
}

TEST_CASE("empty model is optimal with zero objective") {
    ModelBuilder m;
    const auto res = solve(m);
    CHECK(res.optimal());
    CHECK(res.objective_value == 0.0);
}

TEST_CASE("integrality is enforced and MIPs carry no duals") {
    ModelBuilder m;
    m.set_sense(Sense::maximize);
    const auto x = m.add_binary("x");
    m.add_objective(x, 1.0);
    m.add_constraint("half", LinearExpr{}.add(x, 1.0), Relation::less_equal, 0.5);
    const auto res = solve(m);
    REQUIRE(res.optimal());
    CHECK(res.objective_value == doctest::Approx(0.0));
    CHECK_FALSE(res.has_duals());
}

TEST_CASE("infeasible and unbounded statuses") {
    ModelBuilder inf;
    const auto x = inf.add_continuous("x", 0.0, 1.0);
    inf.add_constraint("big", LinearExpr{}.add(x, 1.0), Relation::greater_equal, 2.0);
    CHECK(solve(inf).status == SolveStatus::infeasible);

    ModelBuilder unb;
    unb.set_sense(Sense::maximize);
    const auto y = unb.add_continuous("y", 0.0, kInf);
    unb.add_objective(y, 1.0);
    unb.add_constraint("floor", LinearExpr{}.add(y, 1.0), Relation::greater_equal, 1.0);
    CHECK(solve(unb).status == SolveStatus::unbounded);
}

TEST_CASE("builder validation") {
    ModelBuilder m;
    const auto x = m.add_continuous("x");
    CHECK_THROWS_AS(m.add_continuous("x"), ModelError);
    CHECK_THROWS_AS(m.add_continuous("bad", 2.0, 1.0), ModelError);
    CHECK_THROWS_AS(m.add_constraint("r", LinearExpr{}.add(VarId{7}, 1.0), Relation::equal, 0.0), ModelError);
    m.add_constraint("r", LinearExpr{}.add(x, 1.0), Relation::equal, 0.0);
    CHECK_THROWS_AS(m.add_constraint("r", LinearExpr{}.add(x, 1.0), Relation::equal, 0.0), ModelError);
    CHECK_THROWS_AS(m.var("nope"), ModelError);
}

TEST_CASE("repeated terms merge and constants fold into the right-hand side") {
    ModelBuilder m;
    const auto x = m.add_continuous("x", -kInf, kInf);
    const auto r = m.add_constraint("c", LinearExpr{}.add(x, 1.0).add(x, 2.0).add_constant(1.0), Relation::less_equal, 7.0);
    const auto& c = m.constraint(r);
    REQUIRE(c.terms.size() == 1);
    CHECK(c.terms[0].second == 3.0);
    CHECK(c.rhs == 6.0);
}

namespace {

// Random bounded LP: min c x, A x <= b with a box on x. Built in the given row order.
ModelBuilder random_lp(std::mt19937_64& rng, std::vector<std::size_t> order, std::vector<std::vector<double>>& a,
                       std::vector<double>& b, std::vector<double>& c, bool regenerate) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::size_t n = 6, rows = order.size();
    if (regenerate) {
        a.assign(rows, std::vector<double>(n));
        b.resize(rows);
        c.resize(n);
        for (auto& row : a)
            for (auto& v : row) v = u(rng);
        for (auto& v : b) v = 1.0 + std::abs(u(rng));
        for (auto& v : c) v = u(rng);
    }
    ModelBuilder m;
    std::vector<VarId> x;
    for (std::size_t j = 0; j < n; ++j) {
        x.push_back(m.add_continuous("x" + std::to_string(j), -3.0, 2.0));
        m.add_objective(x.back(), c[j]);
    }
    for (std::size_t i : order) {
        LinearExpr e;
        for (std::size_t j = 0; j < n; ++j) e.add(x[j], a[i][j]);
        m.add_constraint("r" + std::to_string(i), e, Relation::less_equal, b[i]);
    }
    return m;
}

}  // namespace

TEST_CASE("strong duality and row-order independence on random LPs") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::vector<double>> a;
        std::vector<double> b, c;
        std::vector<std::size_t> order(8);
        std::iota(order.begin(), order.end(), 0);
        const auto m1 = random_lp(rng, order, a, b, c, true);
        std::shuffle(order.begin(), order.end(), rng);
        const auto m2 = random_lp(rng, order, a, b, c, false);
        const auto r1 = solve(m1);
        const auto r2 = solve(m2);
        REQUIRE(r1.optimal());
        REQUIRE(r2.optimal());
        CHECK(std::abs(r1.objective_value - dual_objective(m1, r1)) <= 1e-6 * (1.0 + std::abs(r1.objective_value)));
        CHECK(std::abs(r1.objective_value - r2.objective_value) <= 1e-7 * (1.0 + std::abs(r1.objective_value)));
    }
}
