#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gridfire/ambiguity.hpp"
#include "gridfire/pre_contingency.hpp"
#include "gridfire/recourse.hpp"

namespace gridfire {

/// First stage with z fixed and no worst-case term.
FirstStageSolution frozen_flow_solve(const GridInstance& g, const Switching& z);

/// p_l = min(1, gamma_l + beta_l |f_p_l|), clipped to [0, 1].
std::vector<double> line_failure_probabilities(const DduConfig& cfg, const std::vector<double>& f_p);

struct OutOfSampleReport {
    std::vector<double> probabilities;      // per line
    std::size_t samples = 0;
    std::vector<Scenario> scenarios;        // sampled availability vectors
    std::vector<double> loss_of_load_pct;   // active shed / total active demand * 100
    std::vector<double> reactive_loss_pct;  // reactive shed / total reactive demand * 100
    std::vector<double> cost;               // recourse cost per scenario
    std::vector<std::size_t> failure_counts;  // per line
    std::size_t distinct_patterns = 0;
    double mean_pct = 0.0;
    double cvar95_pct = 0.0;  // mean of the worst ceil(0.05 n) losses
    double mean_cost = 0.0;
    std::vector<std::pair<double, double>> inverse_cdf;  // (k / n, k-th largest loss)
};

/// The sampler: std::mt19937_64 seeded with `seed`; each draw is
/// (gen() >> 11) * 2^-53 and line l of scenario i fails when the draw for
/// (i, l), taken in row-major order, is below p_l.
inline constexpr const char* kSamplerName = "mt19937_64/53-bit-uniform/v1";

OutOfSampleReport simulate(const GridInstance& g, const DduConfig& cfg, const Switching& z, std::size_t n,
                           std::uint64_t seed, int threads = 1);

/// Same as simulate with the per-line probabilities given directly.
OutOfSampleReport simulate_with_probabilities(const GridInstance& g, const Switching& z,
                                              const std::vector<double>& probabilities, std::size_t n,
                                              std::uint64_t seed, int threads = 1);

/// Mean of the worst ceil(0.05 n) entries.
double cvar95(std::vector<double> losses);

std::string scenarios_csv(const OutOfSampleReport& r);
std::string inverse_cdf_csv(const OutOfSampleReport& r);

}  // namespace gridfire
