#pragma once

#include <stdexcept>
#include <vector>

#include "gridfire/ambiguity.hpp"
#include "gridfire/milp.hpp"
#include "gridfire/pre_contingency.hpp"
#include "gridfire/recourse.hpp"

namespace gridfire {

/// The dual big-M of the linearised subproblem was too small: the MILP value
/// disagrees with the primal recourse cost of the scenario it picked.
class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SubproblemSolution {
    Scenario scenario;
    DualSolution dual;
    double objective = 0.0;      // H(z, a) - sum_l (psi_l - psi_{L+l})(1 - a_l)
    double recourse_cost = 0.0;  // H(z, a)
    double milp_objective = 0.0; // value reported by the MILP path (equals objective on the enumeration path)
    double dual_big_m = 0.0;     // final bound used by the MILP path
};

/// sum_l (psi_l - psi_{L+l})(1 - a_l)
double psi_penalty(const std::vector<double>& psi, const Scenario& a);

/// Exact max over the support of H(z, a) - psi penalty. Uses the dualised
/// MILP unless cfg.enumerate_subproblem is set.
SubproblemSolution solve_subproblem(const GridInstance& g, const DduConfig& cfg, const Switching& z,
                                    const std::vector<double>& psi, int threads = 1);

/// Dualised recourse with McCormick envelopes on a * eta; adaptive bound.
SubproblemSolution solve_subproblem_milp(const GridInstance& g, const DduConfig& cfg, const Switching& z,
                                         const std::vector<double>& psi);

/// Enumerates the support; ties go to the lexicographically smallest failed set.
SubproblemSolution solve_subproblem_enumerate(const GridInstance& g, const DduConfig& cfg, const Switching& z,
                                              const std::vector<double>& psi, int threads = 1);

}  // namespace gridfire
