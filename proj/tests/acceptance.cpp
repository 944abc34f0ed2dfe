// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gridfire/driver.hpp"
#include "gridfire/master.hpp"
#include "gridfire/montecarlo.hpp"
#include "gridfire/subproblem.hpp"
#include "gridfire/synthetic.hpp"

using namespace gridfire;

namespace {

using Clock = std::chrono::steady_clock;

int failed_criteria = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failed_criteria;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double relative(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

int switch_actions(const FirstStageSolution& fs) {
    int n = 0;
    for (int y : fs.y_sw) n += y;
    return n;
}

DduConfig scaled_beta(DduConfig cfg, double scale) {
    for (double& b : cfg.beta) b *= scale;
    return cfg;
}

// Seeds whose randomized feeders form the shared test set.
constexpr std::uint64_t kSeeds[] = {1, 2, 3, 4, 5, 6, 7};

void rate_conversion() {
    const double a = 100.0 * annual_rate_to_horizon_probability(0.4, 24.0);
    const double b = 100.0 * annual_rate_to_horizon_probability(0.15, 24.0);
    std::ostringstream os;
    os << "0.4/yr -> " << a << "% and 0.15/yr -> " << b << "% per 24 h";
    report("rate conversion", std::abs(a - 0.11) <= 0.005 && std::abs(b - 0.0411) <= 0.005, os.str());
}

void oracle_equivalence() {
    const auto t0 = Clock::now();
    int cases = 0, good = 0;
    double worst = 0.0;
    std::string shape_issue;
    for (std::uint64_t seed : kSeeds) {
        const auto g = random_radial_instance(seed);
        if (g.num_buses() < 4 || g.num_buses() > 10 || g.num_lines() < 3 || g.num_lines() > 12)
            shape_issue = "seed " + std::to_string(seed) + " outside the size range";
        bool mixed = false;
        for (std::size_t k = 0; k <= 2; ++k) {
            const auto cfg = random_ddu_config(g, seed * 7 + k, k);
            bool zero = false, positive = false;
            for (double b : cfg.beta) (b > 0.0 ? positive : zero) = true;
            mixed = mixed || (zero && positive);
            const auto r = solve_ddro(g, cfg);
            const auto& fs = r.solution.first_stage;
            const double ref = fs.total_cost() + worst_case_expectation_oracle(g, cfg, fs.z_sw, fs.f_p).value;
            const double err = relative(r.upper_bound, ref);
            worst = std::max(worst, err);
            ++cases;
            if (r.converged && err <= cfg.epsilon) ++good;
        }
        if (!mixed) shape_issue = "seed " + std::to_string(seed) + " has no mixed beta";
    }
    const double secs = seconds_since(t0);
    std::ostringstream os;
    os << good << "/" << cases << " instances within 1e-4, worst relative error " << worst << ", " << secs << " s";
    if (!shape_issue.empty()) os << "; " << shape_issue;
    report("oracle equivalence", cases >= 20 && good == cases && secs < 300.0 && shape_issue.empty(), os.str());
}

void strong_duality() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2026);
    std::bernoulli_distribution coin(0.5), fail(0.2);
    int solves = 0, good = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 1; solves < 1000; ++seed) {
        const auto g = random_radial_instance(seed);
        RecourseEvaluator eval(g);
        for (int i = 0; i < 50 && solves < 1000; ++i, ++solves) {
            Switching z = initial_switching(g);
            for (std::size_t l = 0; l < g.num_lines(); ++l)
                if (g.lines[l].switchable) z[l] = coin(rng);
            Scenario a(g.num_lines(), 1);
            for (auto& v : a) v = fail(rng) ? 0 : 1;
            const auto r = eval.evaluate(z, a);
            const double err = relative(dual_objective(g, r.dual, z, a), r.cost);
            worst = std::max(worst, err);
            if (err <= 1e-6) ++good;
        }
    }
    const double secs = seconds_since(t0);
    std::ostringstream os;
    os << good << "/" << solves << " recourse solves, worst relative gap " << worst << ", " << secs << " s";
    report("strong duality", good == solves && secs < 120.0, os.str());
}

struct InstanceCase {
    std::string name;
    GridInstance g;
    DduConfig cfg;
};

std::vector<InstanceCase> risk_cases() {
    std::vector<InstanceCase> out;
    for (std::uint64_t seed : kSeeds) {
        auto g = random_radial_instance(seed);
        auto cfg = random_ddu_config(g, seed * 7 + 1, 1);
        out.push_back({"seed " + std::to_string(seed), std::move(g), std::move(cfg)});
    }
    auto g = wildfire_bypass_instance();
    auto cfg = default_config(g, 1);
    cfg.gamma.assign(g.num_lines(), 0.0011);
    cfg.beta[2] = 0.15;
    cfg.expansion_step = 0.01;
    cfg.expansion_digits.assign(g.num_lines(), 6);
    out.push_back({"bypass", std::move(g), std::move(cfg)});
    return out;
}

void warm_start_and_monotonicity(const std::vector<InstanceCase>& cases) {
    int cut_checks = 0, cut_good = 0, warm_good = 0, mono_good = 0;
    double worst_violation = 0.0;
    std::string first_bad;
    for (const auto& c : cases) {
        const auto base = solve_ddro(c.g, scaled_beta(c.cfg, 0.0));
        const auto cold = solve_ddro(c.g, c.cfg);
        const auto warm = solve_ddro(c.g, c.cfg, base.cuts);
        const auto& sol = cold.solution;
        for (const auto& cut : base.cuts) {
            const double v = evaluate_cut(c.g, cut, sol.first_stage.z_sw, sol.psi) - sol.phi;
            worst_violation = std::max(worst_violation, v);
            ++cut_checks;
            if (v <= 1e-6 * std::max(1.0, std::abs(sol.phi))) ++cut_good;
        }
        if (warm.converged && relative(warm.upper_bound, cold.upper_bound) <= c.cfg.epsilon) ++warm_good;

        std::vector<double> obj{base.upper_bound, solve_ddro(c.g, scaled_beta(c.cfg, 0.5)).upper_bound,
                                cold.upper_bound, solve_ddro(c.g, scaled_beta(c.cfg, 2.0)).upper_bound};
        bool mono = true;
        for (std::size_t i = 1; i < obj.size(); ++i)
            mono = mono && obj[i] >= obj[i - 1] - c.cfg.epsilon * std::max(1.0, std::abs(obj[i - 1]));
        if (mono) ++mono_good;
        else if (first_bad.empty()) first_bad = c.name;
    }
    const int n = static_cast<int>(cases.size());
    std::ostringstream ws;
    ws << cut_good << "/" << cut_checks << " zero-risk cuts hold at the risk-aware optimum (worst violation "
       << worst_violation << "); " << warm_good << "/" << n << " warm runs match the cold objective";
    report("warm-start validity", cut_good == cut_checks && warm_good == n, ws.str());
    std::ostringstream ms;
    ms << mono_good << "/" << n << " instances nondecreasing over beta scales {0, 0.5, 1, 2}";
    if (!first_bad.empty()) ms << "; first violation " << first_bad;
    report("monotonicity in beta", mono_good == n, ms.str());
}

DduConfig bypass_regime_config(const GridInstance& g, double beta) {
    auto cfg = default_config(g, 1);
    cfg.beta[2] = beta;
    cfg.expansion_step = 0.01;
    cfg.expansion_digits.assign(g.num_lines(), 6);
    return cfg;
}

// First-stage cost with the bypass forced to `closed`, plus the exact worst-case expectation.
double bypass_branch(const GridInstance& g, double beta, int closed) {
    FirstStageOptions o;
    Switching z(g.num_lines(), 1);
    z[4] = closed;
    o.fixed_z = z;
    const auto fs = solve_first_stage(g, o);
    return fs.total_cost() + worst_case_expectation_oracle(g, bypass_regime_config(g, beta), fs.z_sw, fs.f_p).value;
}

void ddu_regimes() {
    const auto g = wildfire_bypass_instance();
    // Above the threshold, keeping the bypass open is strictly worse than some closed plan.
    double lo = 0.0, hi = 10.0;
    if (!(bypass_branch(g, hi, 0) > bypass_branch(g, hi, 1))) {
        report("ddu regimes", false, "no threshold below beta = 10");
        return;
    }
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (bypass_branch(g, mid, 0) > bypass_branch(g, mid, 1) ? hi : lo) = mid;
    }
    const auto calm = solve_ddro(g, bypass_regime_config(g, 0.0));
    const auto fire = solve_ddro(g, bypass_regime_config(g, 1.5 * hi));
    const int n0 = switch_actions(calm.solution.first_stage), n1 = switch_actions(fire.solution.first_stage);
    std::ostringstream os;
    os.precision(12);
    os << "threshold beta* = " << hi << "; beta = 0 gives " << n0 << " actions, beta = 1.5 beta* gives " << n1;
    report("ddu regimes", calm.converged && fire.converged && n0 == 0 && n1 == 1, os.str());
}

void monte_carlo() {
    const auto g = wildfire_bypass_instance();
    auto cfg = default_config(g, 1);
    cfg.gamma.assign(g.num_lines(), 0.0011);
    cfg.beta[2] = 0.15;
    cfg.expansion_step = 0.01;
    cfg.expansion_digits.assign(g.num_lines(), 6);
    Switching open(5, 1), closed(5, 1);
    open[4] = 0;
    const auto ro = simulate(g, cfg, open, 2000, 20260615);
    const auto rc = simulate(g, cfg, closed, 2000, 20260615);
    const bool golden = ro.mean_pct == 0x1.0888888888884p+1 && ro.cvar95_pct == 0x1.4aaaaaaaaaaa5p+5 &&
                        ro.mean_cost == 0x1.65a07e40c2da6p+3 && rc.mean_pct == 0.0 &&
                        rc.mean_cost == 0x1.a7ae147ae147bp+1;

    std::size_t lines = 0, inside = 0, runs = 0, cvar_ok = 0;
    auto tally = [&](const OutOfSampleReport& r) {
        ++runs;
        if (r.cvar95_pct >= r.mean_pct) ++cvar_ok;
        const double n = static_cast<double>(r.samples);
        for (std::size_t l = 0; l < r.probabilities.size(); ++l) {
            const double p = r.probabilities[l];
            const double sd = std::sqrt(n * p * (1.0 - p));
            ++lines;
            if (std::abs(static_cast<double>(r.failure_counts[l]) - n * p) <= 3.0 * sd) ++inside;
        }
    };
    tally(ro);
    tally(rc);
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        const auto gi = random_radial_instance(seed);
        const auto ci = random_ddu_config(gi, seed, 1);
        tally(simulate(gi, ci, solve_first_stage(gi).z_sw, 2000, 1000 + seed));
    }
    std::ostringstream os;
    os << "goldens " << (golden ? "reproduced" : "differ") << "; " << inside << "/" << lines
       << " line frequencies within 3 sigma; CVaR95 >= mean in " << cvar_ok << "/" << runs << " runs";
    report("monte carlo statistics",
           golden && static_cast<double>(inside) >= 0.99 * static_cast<double>(lines) && cvar_ok == runs, os.str());
}

void master_linearization(const std::vector<InstanceCase>& cases) {
    std::size_t masters = 0, checks = 0, good = 0;
    for (const auto& c : cases) {
        std::vector<OptimalityCut> cuts;
        for (int it = 1; it <= 8; ++it) {
            const auto m = solve_master(c.g, c.cfg, cuts);
            ++masters;
            for (std::size_t l = 0; l < c.g.num_lines(); ++l) {
                const double flow = std::abs(m.first_stage.f_p[l]);
                bool ok = std::abs(m.chi[l] - m.psi[l] * flow) <= m.psi[l] * c.cfg.expansion_step + 1e-6;
                if (m.expanded[l]) ok = ok && std::abs(m.decoded_flow(l, c.cfg.expansion_step) - flow) <= 1e-6;
                ++checks;
                if (ok) ++good;
            }
            const auto sub = solve_subproblem(c.g, c.cfg, m.first_stage.z_sw, m.psi);
            if (sub.objective <= m.phi + c.cfg.epsilon * std::max(1.0, std::abs(m.objective))) break;
            cuts.push_back({it, sub.scenario, sub.dual});
        }
    }
    std::ostringstream os;
    os << good << "/" << checks << " line checks over " << masters << " master optima";
    report("master linearization", good == checks, os.str());
}

void empty_budget() {
    int cases = 0, good = 0;
    for (std::uint64_t seed : kSeeds) {
        const auto g = random_radial_instance(seed);
        const auto r = solve_ddro(g, random_ddu_config(g, seed, 0));
        const auto& fs = r.solution.first_stage;
        const double h = evaluate_recourse(g, fs.z_sw, all_available(g)).cost;
        ++cases;
        if (r.converged && r.iterations == 1 && relative(r.upper_bound - fs.total_cost(), h) <= 1e-6) ++good;
    }
    std::ostringstream os;
    os << good << "/" << cases << " runs stop after one iteration with sup term H(z, all available)";
    report("empty failure budget", good == cases, os.str());
}

}  // namespace

int main() {
    const auto t0 = Clock::now();
    const auto cases = risk_cases();
    const std::vector<std::function<void()>> steps{
        rate_conversion,
        oracle_equivalence,
        strong_duality,
        [&] { warm_start_and_monotonicity(cases); },
        ddu_regimes,
        monte_carlo,
        [&] { master_linearization(cases); },
        empty_budget,
    };
    for (const auto& step : steps) {
        try {
            step();
        } catch (const std::exception& e) {
            report("criterion aborted", false, e.what());
        }
    }
    std::printf("%d failing criteria, %.1f s\n", failed_criteria, seconds_since(t0));
    return failed_criteria == 0 ? 0 : 1;
}
