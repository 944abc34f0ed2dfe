#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridfire/ambiguity.hpp"
#include "gridfire/master.hpp"
#include "gridfire/subproblem.hpp"

namespace gridfire {

/// A cut cache written for a different instance topology.
class SignatureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct IterationLog {
    int iteration = 0;
    double lb = 0.0;       // best lower bound so far
    double ub = 0.0;       // this iteration's upper bound
    double best_ub = 0.0;  // running minimum
    double gap = 0.0;      // (best_ub - lb) / max(|best_ub|, 1)
    Scenario scenario_added;
    double seconds = 0.0;  // wall time since the run started
};

struct DdroOptions {
    int threads = 1;
    std::function<void(const IterationLog&)> on_iteration;
};

struct DdroResult {
    MasterSolution solution;          // master point that attained best_ub
    SubproblemSolution worst_case;    // subproblem at that point
    std::vector<IterationLog> log;
    std::vector<OptimalityCut> cuts;  // warm cuts followed by the cuts of this run
    std::size_t warm_cut_count = 0;
    int iterations = 0;  // index m of the final iteration
    bool converged = false;
    double lower_bound = 0.0;
    double upper_bound = 0.0;
    double gap = 0.0;

    /// First-stage cost plus the dualised worst-case term at the incumbent.
    double objective() const { return upper_bound; }
};

DdroResult solve_ddro(const GridInstance& g, const DduConfig& cfg, const std::vector<OptimalityCut>& warm_cuts = {},
                      const DdroOptions& opt = {});

/// `config_hash` is recorded when non-empty; cuts themselves do not depend on
/// the ambiguity parameters, so loading ignores it.
std::string cuts_to_json(const GridInstance& g, const std::vector<OptimalityCut>& cuts,
                         const std::string& config_hash = {});
std::vector<OptimalityCut> cuts_from_json(const GridInstance& g, const std::string& text);
void save_cuts(const GridInstance& g, const std::vector<OptimalityCut>& cuts, const std::filesystem::path& path,
               const std::string& config_hash = {});
/// Throws SignatureError when the file was produced for another topology.
std::vector<OptimalityCut> load_cuts(const GridInstance& g, const std::filesystem::path& path);

std::string iteration_log_csv(const std::vector<IterationLog>& log);

}  // namespace gridfire
