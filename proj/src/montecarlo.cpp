#include "gridfire/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "gridfire/parallel.hpp"

namespace gridfire {

FirstStageSolution frozen_flow_solve(const GridInstance& g, const Switching& z) {
    FirstStageOptions opt;
    opt.fixed_z = normalize_switching(g, z);
    check_switching(g, *opt.fixed_z);
    return solve_first_stage(g, opt);
}

std::vector<double> line_failure_probabilities(const DduConfig& cfg, const std::vector<double>& f_p) {
    if (cfg.gamma.size() != f_p.size() || cfg.beta.size() != f_p.size())
        throw PreconditionError("flow vector does not match the configuration");
    std::vector<double> p(f_p.size());
    for (std::size_t l = 0; l < f_p.size(); ++l) p[l] = std::clamp(cfg.gamma[l] + cfg.beta[l] * std::abs(f_p[l]), 0.0, 1.0);
    return p;
}

double cvar95(std::vector<double> losses) {
    if (losses.empty()) return 0.0;
    const auto tail = static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(losses.size()) - 1e-12));
    const std::size_t k = std::max<std::size_t>(1, tail);
    std::partial_sort(losses.begin(), losses.begin() + static_cast<std::ptrdiff_t>(k), losses.end(), std::greater<>());
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += losses[i];
    return s / static_cast<double>(k);
}

OutOfSampleReport simulate_with_probabilities(const GridInstance& g, const Switching& z_in,
                                              const std::vector<double>& probabilities, std::size_t n,
                                              std::uint64_t seed, int threads) {
    if (n == 0) throw PreconditionError("sample count must be at least 1");
    const std::size_t nl = g.num_lines();
    if (probabilities.size() != nl) throw PreconditionError("probability vector does not match the instance");
    const Switching z = normalize_switching(g, z_in);
    check_switching(g, z);

    OutOfSampleReport r;
    r.probabilities = probabilities;
    r.samples = n;
    r.failure_counts.assign(nl, 0);
    r.scenarios.reserve(n);
    std::mt19937_64 gen(seed);
    for (std::size_t i = 0; i < n; ++i) {
        Scenario a(nl, 1);
        for (std::size_t l = 0; l < nl; ++l) {
            const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
            if (u < probabilities[l]) {
                a[l] = 0;
                ++r.failure_counts[l];
            }
        }
        r.scenarios.push_back(std::move(a));
    }

    // Evaluate each distinct pattern once; results are gathered by index so the
    // reduction does not depend on worker scheduling.
    std::map<Scenario, std::size_t> slot;
    std::vector<const Scenario*> distinct;
    for (const auto& a : r.scenarios)
        if (slot.emplace(a, distinct.size()).second) distinct.push_back(&a);
    r.distinct_patterns = distinct.size();
    const RecourseEvaluator eval(g);
    std::vector<RecourseResult> results(distinct.size());
    parallel_for(distinct.size(), threads, [&](std::size_t i) { results[i] = eval.evaluate(z, *distinct[i]); });

    double demand_p = 0.0, demand_q = 0.0;
    for (const auto& b : g.buses) {
        demand_p += b.demand_p;
        demand_q += b.demand_q();
    }
    r.loss_of_load_pct.reserve(n);
    for (const auto& a : r.scenarios) {
        const auto& res = results[slot.at(a)];
        const double shed_p = std::accumulate(res.shed_p_minus.begin(), res.shed_p_minus.end(), 0.0);
        const double shed_q = std::accumulate(res.shed_q_minus.begin(), res.shed_q_minus.end(), 0.0);
        r.loss_of_load_pct.push_back(demand_p > 0.0 ? std::clamp(100.0 * shed_p / demand_p, 0.0, 100.0) : 0.0);
        r.reactive_loss_pct.push_back(demand_q > 0.0 ? std::clamp(100.0 * shed_q / demand_q, 0.0, 100.0) : 0.0);
        r.cost.push_back(res.cost);
    }
    const double dn = static_cast<double>(n);
    r.mean_pct = std::accumulate(r.loss_of_load_pct.begin(), r.loss_of_load_pct.end(), 0.0) / dn;
    r.mean_cost = std::accumulate(r.cost.begin(), r.cost.end(), 0.0) / dn;
    r.cvar95_pct = cvar95(r.loss_of_load_pct);

    std::vector<double> sorted = r.loss_of_load_pct;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    for (std::size_t k = 0; k < n; ++k) r.inverse_cdf.emplace_back(static_cast<double>(k + 1) / dn, sorted[k]);
    return r;
}

OutOfSampleReport simulate(const GridInstance& g, const DduConfig& cfg, const Switching& z, std::size_t n,
                           std::uint64_t seed, int threads) {
    cfg.validate(g);
    const FirstStageSolution fs = frozen_flow_solve(g, z);
    return simulate_with_probabilities(g, fs.z_sw, line_failure_probabilities(cfg, fs.f_p), n, seed, threads);
}

std::string scenarios_csv(const OutOfSampleReport& r) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "scenario_id,loss_pct,cost,reactive_loss_pct,failed_line_indices\n";
    for (std::size_t i = 0; i < r.samples; ++i) {
        os << i << ',' << r.loss_of_load_pct[i] << ',' << r.cost[i] << ',' << r.reactive_loss_pct[i] << ',';
        bool first = true;
        for (std::size_t l = 0; l < r.scenarios[i].size(); ++l)
            if (!r.scenarios[i][l]) {
                os << (first ? "" : " ") << l;
                first = false;
            }
        os << '\n';
    }
    return os.str();
}

std::string inverse_cdf_csv(const OutOfSampleReport& r) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "probability,loss_pct\n";
    for (const auto& [p, loss] : r.inverse_cdf) os << p << ',' << loss << '\n';
    return os.str();
}

}  // namespace gridfire
