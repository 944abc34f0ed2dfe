#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gridfire/grid_model.hpp"
#include "gridfire/milp.hpp"

namespace gridfire {

/// Switching status per line index (1 closed, 0 open). Entries for
/// non-switchable lines are ignored and normalised to 1.
using Switching = std::vector<int>;

/// A caller handed in data that breaks a documented precondition
/// (e.g. a switching vector that closes a forbidden pattern).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Octagon row coefficients for sector e in 1..4:
///   +-f_q - slope * f_p <= f_max * offset
struct OctagonSector {
    double slope = 0.0;   // cot((1/2 - e) pi/4)
    double offset = 0.0;  // sin(e pi/4) - slope * cos(e pi/4)
};
const std::array<OctagonSector, 4>& octagon_sectors();

/// Smallest voltage big-M that leaves the switchable voltage-drop pair
/// vacuous for any feasible voltages and flows when the line is open.
double voltage_big_m(const GridInstance& g, std::size_t line);

Switching initial_switching(const GridInstance& g);
Switching normalize_switching(const GridInstance& g, Switching z);
/// Throws PreconditionError on a size mismatch or a closed forbidden pattern.
void check_switching(const GridInstance& g, const Switching& z);

struct FirstStageOptions {
    std::optional<Switching> fixed_z;
};

/// Variable handles into a builder populated by build_first_stage. Per-line
/// vectors are indexed by line; z and y are only set for switchable lines.
struct FirstStageHandles {
    std::vector<std::optional<milp::VarId>> z, y;
    std::vector<milp::VarId> f_p, f_q;
    std::vector<milp::VarId> p_tr, q_tr;  // per substation
    std::vector<milp::VarId> v_sq;
    std::vector<milp::VarId> shed_p_minus, shed_p_plus, shed_q_minus, shed_q_plus;
    std::size_t balance_rows = 0;
    std::size_t octagon_rows = 0;
};

FirstStageHandles build_first_stage(const GridInstance& g, milp::ModelBuilder& m,
                                    const FirstStageOptions& opt = {});

struct FirstStageSolution {
    Switching z_sw;  // per line; 1 for non-switchable
    Switching y_sw;  // per line; 0 for non-switchable
    std::vector<double> f_p, f_q;
    std::vector<double> p_tr, q_tr;
    std::vector<double> v_sq;
    std::vector<double> shed_p_minus, shed_p_plus, shed_q_minus, shed_q_plus;
    double cost_energy = 0.0;
    double cost_shed = 0.0;
    double cost_switch = 0.0;

    double total_cost() const { return cost_energy + cost_shed + cost_switch; }
};

FirstStageSolution extract_first_stage(const GridInstance& g, const FirstStageHandles& h,
                                       const milp::SolveResult& result);

/// Solves the first-stage model alone (no worst-case term), optionally with z fixed.
FirstStageSolution solve_first_stage(const GridInstance& g, const FirstStageOptions& opt = {},
                                     const milp::SolverParams& params = {});

}  // namespace gridfire
