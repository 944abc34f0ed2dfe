#pragma once

#include <optional>
#include <vector>

#include "gridfire/ambiguity.hpp"
#include "gridfire/milp.hpp"
#include "gridfire/pre_contingency.hpp"
#include "gridfire/recourse.hpp"

namespace gridfire {

/// One recorded worst-case solution; defines phi >= cut(z, psi).
struct OptimalityCut {
    int id = 0;
    Scenario scenario;
    DualSolution dual;
};

/// The cut right-hand side split into its pieces:
///   constant + sum_l z_coef[l] z[l] - sum_{l failed} (psi_l - psi_{L+l}).
struct CutForm {
    double constant = 0.0;
    std::vector<double> z_coef;
    std::vector<std::size_t> failed;
};

CutForm cut_form(const GridInstance& g, const OptimalityCut& cut);

/// Right-hand side of the cut at (z, psi); psi has 2|L| entries.
double evaluate_cut(const GridInstance& g, const OptimalityCut& cut, const Switching& z, const std::vector<double>& psi);

/// C^ll * (sum_b D_b (1 + tan phi_b) + sum_s max(0, Q_min) + max(0, -Q_max)) + sum C^tr P_max:
/// a bound on any recourse cost, and therefore on the useful range of each psi.
double default_psi_big_m(const GridInstance& g);

struct MasterHandles {
    FirstStageHandles first;
    std::vector<milp::VarId> psi;  // 2|L|
    milp::VarId phi;
    // Present only for expanded lines.
    std::vector<std::optional<milp::VarId>> chi, xi, f_plus, f_minus;
    std::vector<std::vector<milp::VarId>> delta, rho;
    std::vector<milp::RowId> cut_rows;
    double psi_big_m = 0.0;
};

/// Throws ConfigError when the expansion cannot span a line's flow range.
MasterHandles build_master(const GridInstance& g, const DduConfig& cfg, const std::vector<OptimalityCut>& cuts,
                           milp::ModelBuilder& m);

struct MasterSolution {
    FirstStageSolution first_stage;
    std::vector<double> psi;
    double phi = 0.0;
    std::vector<double> chi;               // per line; psi_l |f_p,l| for lines without expansion
    std::vector<int> xi;                   // per line; -1 for lines without expansion
    std::vector<std::vector<int>> delta;   // per line, digit
    std::vector<std::vector<double>> rho;  // per line, digit
    std::vector<bool> expanded;
    double objective = 0.0;    // incumbent objective
    double lower_bound = 0.0;  // solver dual bound
    double worst_case_term = 0.0;  // sum(gamma psi + beta chi) + phi

    /// s * sum 2^(e-1) delta_le, or -1 for lines without expansion.
    double decoded_flow(std::size_t line, double step) const;
};

MasterSolution solve_master(const GridInstance& g, const DduConfig& cfg, const std::vector<OptimalityCut>& cuts,
                            const milp::SolverParams& params = {});

}  // namespace gridfire
