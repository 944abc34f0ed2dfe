#include "gridfire/subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gridfire/parallel.hpp"

namespace gridfire {

using milp::LinearExpr;
using milp::Relation;

double psi_penalty(const std::vector<double>& psi, const Scenario& a) {
    const std::size_t nl = a.size();
    if (psi.size() != 2 * nl) throw PreconditionError("psi must have 2|L| entries");
    double p = 0.0;
    for (std::size_t l = 0; l < nl; ++l)
        if (!a[l]) p += psi[l] - psi[nl + l];
    return p;
}

namespace {

constexpr double kAgreement = 1e-6;
// Weight on bounded duals that removes zero-cost rays (e.g. the +fp/-fp pair of a
// failed line); it is added back before any value comparison.
constexpr double kRayWeight = 1e-9;

bool agrees(double x, double y) { return std::abs(x - y) <= kAgreement * std::max(1.0, std::abs(y)); }

// Largest dual seen on the a-dependent rows over a handful of primal solves.
double probe_dual_scale(const GridInstance& g, const DduConfig& cfg, const RecourseEvaluator& eval,
                        const Switching& z) {
    double scale = 0.0;
    auto absorb = [&](const Scenario& a) {
        const auto r = eval.evaluate(z, a);
        for (const auto& row : eval.tmpl().rows)
            if (row.a_coef != 0.0) scale = std::max(scale, std::abs(r.dual.eta[row.cls][row.index]));
    };
    absorb(all_available(g));
    if (cfg.k_budget >= 1)
        for (std::size_t l = 0; l < g.num_lines(); ++l) {
            Scenario a = all_available(g);
            a[l] = 0;
            absorb(a);
        }
    return scale;
}

struct MilpOutcome {
    Scenario scenario;
    double value = 0.0;
    bool at_bound = false;
};

MilpOutcome solve_dualized(const GridInstance& g, const DduConfig& cfg, const RecourseTemplate& t,
                           const Switching& z, const std::vector<double>& psi, double big_m) {
    const std::size_t nl = g.num_lines();
    milp::ModelBuilder m;
    m.set_sense(milp::Sense::maximize);

    std::vector<milp::VarId> a;
    LinearExpr card;
    for (std::size_t l = 0; l < nl; ++l) {
        a.push_back(m.add_binary("a[" + std::to_string(g.lines[l].id) + "]"));
        card.add(a.back(), 1.0);
        const double p = psi[l] - psi[nl + l];
        m.add_objective(a.back(), p);
        m.add_objective_constant(-p);
    }
    m.add_constraint("support", card, Relation::greater_equal, static_cast<double>(nl - cfg.k_budget));

    std::vector<milp::VarId> eta;
    std::vector<std::size_t> bounded;
    std::vector<LinearExpr> stationarity(t.num_columns());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        const std::string name = "eta" + std::to_string(r.cls) + "#" + std::to_string(i);
        const double lo = r.equality ? -milp::kInf : 0.0;
        const double hi = r.a_coef != 0.0 ? big_m : milp::kInf;
        eta.push_back(m.add_continuous(name, lo, hi));
        m.add_objective(eta.back(), -(r.h0 + r.z_coef * z[r.line]) - (r.a_coef != 0.0 ? kRayWeight : 0.0));
        for (const auto& [col, coef] : r.terms) stationarity[col].add(eta.back(), coef);
        if (r.a_coef != 0.0) {
            // w = a * eta with 0 <= eta <= big_m
            bounded.push_back(i);
            const auto w = m.add_continuous("w#" + std::to_string(i), 0.0, big_m);
            const auto al = a[r.line];
            m.add_objective(w, -r.a_coef);
            m.add_constraint("w_le_eta#" + std::to_string(i), LinearExpr{}.add(w, 1.0).add(eta.back(), -1.0),
                             Relation::less_equal, 0.0);
            m.add_constraint("w_le_a#" + std::to_string(i), LinearExpr{}.add(w, 1.0).add(al, -big_m),
                             Relation::less_equal, 0.0);
            m.add_constraint("w_ge#" + std::to_string(i),
                             LinearExpr{}.add(w, 1.0).add(eta.back(), -1.0).add(al, -big_m), Relation::greater_equal,
                             -big_m);
        }
    }
    for (std::size_t j = 0; j < t.num_columns(); ++j)
        m.add_constraint("dual_feas[" + t.column_names[j] + "]", stationarity[j], Relation::equal, -t.cost[j]);

    milp::SolverParams params;
    const auto res = milp::solve(m, params);
    if (!res.optimal())
        throw milp::SolverError(std::string("subproblem MILP ") + milp::to_string(res.status) + ": " + res.message);

    MilpOutcome out;
    out.value = res.objective_value;
    for (std::size_t i : bounded) out.value += kRayWeight * res.value(eta[i]);
    out.scenario.resize(nl);
    for (std::size_t l = 0; l < nl; ++l) out.scenario[l] = res.value(a[l]) > 0.5 ? 1 : 0;
    for (std::size_t i : bounded)
        if (res.value(eta[i]) >= big_m * (1.0 - 1e-6)) out.at_bound = true;
    return out;
}

}  // namespace

SubproblemSolution solve_subproblem_milp(const GridInstance& g, const DduConfig& cfg, const Switching& z_in,
                                         const std::vector<double>& psi) {
    const Switching z = normalize_switching(g, z_in);
    check_switching(g, z);
    const RecourseEvaluator eval(g);
    double big_m = 0.0;
    if (cfg.dual_big_m) {
        big_m = *cfg.dual_big_m;
    } else {
        double max_energy = 0.0;
        for (const auto& s : g.substations) max_energy = std::max(max_energy, s.energy_cost);
        big_m = 10.0 * std::max(g.loss_cost + max_energy, probe_dual_scale(g, cfg, eval, z));
        big_m = std::max(big_m, 1.0);
    }

    constexpr int kAttempts = 4;
    std::string last_issue;
    for (int attempt = 0; attempt < kAttempts; ++attempt, big_m *= 10.0) {
        const MilpOutcome o = solve_dualized(g, cfg, eval.tmpl(), z, psi, big_m);
        if (o.at_bound) {
            last_issue = "a bounded dual reached the bound " + std::to_string(big_m);
            continue;
        }
        const auto primal = eval.evaluate(z, o.scenario);
        const double exact = primal.cost - psi_penalty(psi, o.scenario);
        if (!agrees(o.value, exact)) {
            last_issue = "MILP value " + std::to_string(o.value) + " vs primal re-evaluation " + std::to_string(exact) +
                         " at dual bound " + std::to_string(big_m);
            if (o.value < exact) continue;  // restricted duals undervalue the scenario
            throw CalibrationError(last_issue);
        }
        SubproblemSolution s;
        s.scenario = o.scenario;
        s.dual = primal.dual;
        s.recourse_cost = primal.cost;
        s.objective = exact;
        s.milp_objective = o.value;
        s.dual_big_m = big_m;
        return s;
    }
    throw CalibrationError("subproblem dual bound could not be calibrated: " + last_issue);
}

SubproblemSolution solve_subproblem_enumerate(const GridInstance& g, const DduConfig& cfg, const Switching& z_in,
                                              const std::vector<double>& psi, int threads) {
    const Switching z = normalize_switching(g, z_in);
    check_switching(g, z);
    const auto support = enumerate_support(g.num_lines(), cfg.k_budget, cfg.support_cap);
    const RecourseEvaluator eval(g);
    std::vector<RecourseResult> results(support.size());
    parallel_for(support.size(), threads, [&](std::size_t s) { results[s] = eval.evaluate(z, support[s]); });

    std::size_t best = 0;
    double best_value = results[0].cost - psi_penalty(psi, support[0]);
    for (std::size_t s = 1; s < support.size(); ++s) {
        const double v = results[s].cost - psi_penalty(psi, support[s]);
        const double tie = 1e-9 * std::max(1.0, std::abs(best_value));
        if (v > best_value + tie || (std::abs(v - best_value) <= tie && failed_set_less(support[s], support[best]))) {
            best = s;
            best_value = std::max(v, best_value);
        }
    }
    SubproblemSolution out;
    out.scenario = support[best];
    out.dual = std::move(results[best].dual);
    out.recourse_cost = results[best].cost;
    out.objective = results[best].cost - psi_penalty(psi, support[best]);
    out.milp_objective = out.objective;
    return out;
}

SubproblemSolution solve_subproblem(const GridInstance& g, const DduConfig& cfg, const Switching& z,
                                    const std::vector<double>& psi, int threads) {
    if (cfg.enumerate_subproblem) return solve_subproblem_enumerate(g, cfg, z, psi, threads);
    return solve_subproblem_milp(g, cfg, z, psi);
}

}  // namespace gridfire
