#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridfire/grid_model.hpp"
#include "gridfire/pre_contingency.hpp"
#include "gridfire/recourse.hpp"

namespace gridfire {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The enumeration oracle refuses supports larger than the configured cap.
class SupportCapError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Ambiguity-set and algorithm parameters. Per-line vectors are indexed by
/// line position in the instance.
struct DduConfig {
    std::vector<double> gamma;
    std::vector<double> beta;  // probability per per-unit flow
    std::size_t k_budget = 0;
    double expansion_step = 0.0;
    std::vector<int> expansion_digits;
    double epsilon = 1e-4;
    std::optional<double> psi_big_m;   // derived from costs when absent
    std::optional<double> dual_big_m;  // derived from probe solves when absent
    bool fix_psi_lower = false;
    /// Expand every line's flow even where beta is zero (the product term
    /// then has a zero coefficient, so skipping it is exact).
    bool expand_all_lines = false;
    /// Solve the worst-case subproblem by enumerating the support instead of
    /// the dualized MILP.
    bool enumerate_subproblem = false;
    int max_iterations = 500;
    std::size_t support_cap = 2'000'000;

    /// Throws ConfigError on the first violated invariant.
    void validate(const GridInstance& g) const;
};

/// gamma = beta = 0, s = max f_max / 127, E = 7, the given K.
DduConfig default_config(const GridInstance& g, std::size_t k);

/// Per-line fields accept a number, an array in line order, or an object
/// {"default": v, "<line id>": v, ...}.
DduConfig parse_ddu_config(const std::string& json_text, const GridInstance& g);
DduConfig load_ddu_config(const std::filesystem::path& path, const GridInstance& g);
std::string ddu_config_to_json(const DduConfig& cfg, const GridInstance& g, int indent = 2);
/// FNV-1a of the canonical compact JSON form.
std::uint64_t config_hash(const DduConfig& cfg, const GridInstance& g);

struct MomentBound {
    std::vector<double> mu_upper;  // gamma + beta |f_p|; the lower rows are all zero

    /// The 2|L| stacked vector [mu_upper ; 0].
    std::vector<double> full() const;
};

MomentBound mean_bound(const DduConfig& cfg, const std::vector<double>& f_p);

/// sum_{j<=k} C(n, j), saturating at SIZE_MAX.
std::size_t support_size(std::size_t num_lines, std::size_t k);

/// All availability vectors with at most k failures, ordered by failure
/// count and then lexicographically by failed-line set.
std::vector<Scenario> enumerate_support(std::size_t num_lines, std::size_t k,
                                        std::size_t cap = 2'000'000);

/// Lexicographic comparison of failed-line index sets.
bool failed_set_less(const Scenario& a, const Scenario& b);

/// Optimum of max sum H q over distributions on `scenarios` with moment
/// rows E[1-a_l] <= mu_l (psi_l) and -E[1-a_l] <= 0 (psi_{L+l}), plus the
/// normalisation row (phi). psi and phi are its optimal duals.
struct InnerSolution {
    double value = 0.0;
    std::vector<double> q;    // per scenario
    std::vector<double> psi;  // 2|L|
    double phi = 0.0;
};

InnerSolution solve_distribution_lp(const std::vector<double>& h_values, const std::vector<Scenario>& scenarios,
                                    const std::vector<double>& mu_upper);

struct OracleResult {
    double value = 0.0;
    std::vector<Scenario> scenarios;
    std::vector<double> h_values;
    std::vector<double> q;
    std::vector<double> psi;
    double phi = 0.0;
    std::vector<double> mu_upper;
};

/// Worst-case expected recourse cost by explicit support enumeration.
OracleResult worst_case_expectation_oracle(const GridInstance& g, const DduConfig& cfg, const Switching& z,
                                           const std::vector<double>& f_p, int threads = 1);

struct InnerDual {
    std::vector<double> psi;
    double phi = 0.0;
    double dual_value = 0.0;  // psi . [mu_upper ; 0] + phi
};

/// Dual weights of the oracle's moment rows; dual_value matches the oracle value.
InnerDual dualize_inner(const OracleResult& oracle);

}  // namespace gridfire
