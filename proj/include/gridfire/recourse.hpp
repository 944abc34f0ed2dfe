#pragma once

#include <array>
#include <string>
#include <vector>

#include "gridfire/grid_model.hpp"
#include "gridfire/milp.hpp"
#include "gridfire/pre_contingency.hpp"

namespace gridfire {

/// Line availability per line index: 1 in service, 0 failed.
using Scenario = std::vector<int>;

Scenario all_available(const GridInstance& g);
/// Number of failed lines.
std::size_t failures(const Scenario& a);
/// "1101..." with one character per line index.
std::string scenario_bits(const Scenario& a);
Scenario scenario_from_bits(const std::string& bits);

inline constexpr int kEtaClasses = 31;

/// Recourse duals by class 1..31 (slot 0 unused). Layout of each class:
///   bus-indexed   : 1-4, 9, 10, 21-31 (zero where the row does not exist)
///   line-indexed  : 5-8, 11-18
///   line*4 + e-1  : 19, 20
/// Inequality duals are >= 0; equality duals (1-4, 25) are free. With every
/// row written as g(x) <= h or g(x) = h the dual objective is -sum h*eta.
struct DualSolution {
    std::array<std::vector<double>, kEtaClasses + 1> eta;

    static DualSolution zeros(const GridInstance& g);
    static std::size_t class_size(const GridInstance& g, int cls);
    static bool is_equality(int cls) { return cls <= 4 || cls == 25; }
    static std::string class_name(int cls) { return "eta" + std::to_string(cls); }
    double max_abs() const;
};

/// One primal row of the recourse LP in g(x) (<=|=) h form, with
/// h = h0 + a_coef * a[line] + z_coef * z[line].
struct RecourseRow {
    int cls = 0;
    std::size_t index = 0;  // slot inside DualSolution::eta[cls]
    bool equality = false;
    std::vector<std::pair<std::size_t, double>> terms;  // column, coefficient
    double h0 = 0.0;
    double a_coef = 0.0;
    double z_coef = 0.0;
    std::size_t line = 0;  // meaningful when a_coef or z_coef is nonzero

    double rhs(const Switching& z, const Scenario& a) const {
        return h0 + a_coef * a[line] + z_coef * z[line];
    }
};

/// The recourse LP with every variable free and every bound written as a row.
struct RecourseTemplate {
    std::vector<std::string> column_names;
    std::vector<double> cost;
    std::vector<RecourseRow> rows;
    // Column positions.
    std::size_t col_fp = 0, col_fq = 0, col_p = 0, col_q = 0, col_v = 0;
    std::size_t col_dp_minus = 0, col_dp_plus = 0, col_dq_minus = 0, col_dq_plus = 0;

    std::size_t num_columns() const { return cost.size(); }
};

RecourseTemplate build_recourse_template(const GridInstance& g);

struct RecourseResult {
    double cost = 0.0;
    DualSolution dual;
    std::vector<double> f_p, f_q;
    std::vector<double> shed_p_minus, shed_p_plus, shed_q_minus, shed_q_plus;

    double shed_p_total() const;
    double shed_q_total() const;
};

/// Reusable evaluator; holds the template so repeated solves skip its construction.
class RecourseEvaluator {
public:
    explicit RecourseEvaluator(const GridInstance& g);
    RecourseResult evaluate(const Switching& z, const Scenario& a, const milp::SolverParams& params = {}) const;
    const RecourseTemplate& tmpl() const { return tmpl_; }
    const GridInstance& grid() const { return *g_; }

private:
    const GridInstance* g_;
    RecourseTemplate tmpl_;
};

RecourseResult evaluate_recourse(const GridInstance& g, const Switching& z, const Scenario& a,
                                 const milp::SolverParams& params = {});

/// Closed-form dual objective -sum h(z,a)*eta, term by term.
double dual_objective(const GridInstance& g, const DualSolution& dual, const Switching& z, const Scenario& a);

/// The dual objective as an affine function of z for fixed (dual, a):
/// value(z) = constant + sum_l z_coef[l] * z[l].
struct DualAffine {
    double constant = 0.0;
    std::vector<double> z_coef;  // per line; zero for non-switchable lines

    double at(const Switching& z) const;
};
DualAffine dual_affine_in_z(const GridInstance& g, const DualSolution& dual, const Scenario& a);

/// Support membership: a is binary, sized to the line count, and fails at most k lines.
bool in_support(const GridInstance& g, const Scenario& a, std::size_t k);

}  // namespace gridfire
