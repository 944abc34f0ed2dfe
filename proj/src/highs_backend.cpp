#include <cmath>

#include <Highs.h>

#include "gridfire/milp.hpp"

namespace gridfire::milp {
namespace {

double to_highs(double v) {
    if (v == kInf) return kHighsInf;
    if (v == -kInf) return -kHighsInf;
    return v;
}

class HighsBackend : public SolverBackend {
public:
    std::string name() const override { return "highs"; }

    SolveResult solve(const ModelBuilder& model, const SolverParams& params) override {
        const bool is_mip = model.has_integers();
        const auto n = static_cast<HighsInt>(model.num_variables());
        const auto m = static_cast<HighsInt>(model.num_constraints());

        HighsModel hm;
        HighsLp& lp = hm.lp_;
        lp.num_col_ = n;
        lp.num_row_ = m;
        lp.sense_ = model.sense() == Sense::minimize ? ObjSense::kMinimize : ObjSense::kMaximize;
        lp.offset_ = model.objective_constant();
        lp.col_cost_ = model.objective();
        lp.col_lower_.resize(n);
        lp.col_upper_.resize(n);
        if (is_mip) lp.integrality_.assign(n, HighsVarType::kContinuous);
        for (HighsInt j = 0; j < n; ++j) {
            const auto& v = model.variables()[j];
            lp.col_lower_[j] = to_highs(v.lower);
            lp.col_upper_[j] = to_highs(v.upper);
            if (is_mip && v.type == VarType::binary) lp.integrality_[j] = HighsVarType::kInteger;
        }

        lp.row_lower_.resize(m);
        lp.row_upper_.resize(m);
        std::vector<std::vector<std::pair<HighsInt, double>>> columns(n);
        for (HighsInt i = 0; i < m; ++i) {
            const auto& c = model.constraints()[i];
            switch (c.relation) {
                case Relation::less_equal:
                    lp.row_lower_[i] = -kHighsInf;
                    lp.row_upper_[i] = c.rhs;
                    break;
                case Relation::equal:
                    lp.row_lower_[i] = c.rhs;
                    lp.row_upper_[i] = c.rhs;
                    break;
                case Relation::greater_equal:
                    lp.row_lower_[i] = c.rhs;
                    lp.row_upper_[i] = kHighsInf;
                    break;
            }
            for (const auto& [v, coef] : c.terms) columns[v.index].emplace_back(i, coef);
        }
        auto& a = lp.a_matrix_;
        a.format_ = MatrixFormat::kColwise;
        a.num_col_ = n;
        a.num_row_ = m;
        a.start_.assign(1, 0);
        for (const auto& col : columns) {
            for (const auto& [row, coef] : col) {
                a.index_.push_back(row);
                a.value_.push_back(coef);
            }
            a.start_.push_back(static_cast<HighsInt>(a.index_.size()));
        }

        Highs highs;
        highs.setOptionValue("output_flag", params.verbose);
        highs.setOptionValue("primal_feasibility_tolerance", params.feasibility_tolerance);
        highs.setOptionValue("dual_feasibility_tolerance", params.optimality_tolerance);
        highs.setOptionValue("mip_feasibility_tolerance", params.feasibility_tolerance);
        highs.setOptionValue("mip_rel_gap", params.mip_rel_gap);
        highs.setOptionValue("mip_abs_gap", params.mip_abs_gap);
        if (std::isfinite(params.time_limit)) highs.setOptionValue("time_limit", params.time_limit);
        if (!is_mip) highs.setOptionValue("solver", "simplex");

        if (highs.passModel(std::move(hm)) == HighsStatus::kError)
            throw SolverError("highs rejected the model");
        if (highs.run() == HighsStatus::kError) throw SolverError("highs run failed");

        SolveResult result;
        const HighsModelStatus status = highs.getModelStatus();
        result.message = highs.modelStatusToString(status);
        switch (status) {
            case HighsModelStatus::kOptimal:
                result.status = SolveStatus::optimal;
                break;
            case HighsModelStatus::kInfeasible:
                result.status = SolveStatus::infeasible;
                return result;
            case HighsModelStatus::kUnbounded:
            case HighsModelStatus::kUnboundedOrInfeasible:
                result.status = SolveStatus::unbounded;
                return result;
            case HighsModelStatus::kTimeLimit:
            case HighsModelStatus::kIterationLimit:
            case HighsModelStatus::kSolutionLimit:
            case HighsModelStatus::kInterrupt:
                result.status = SolveStatus::limit;
                break;
            case HighsModelStatus::kModelEmpty:
                result.status = SolveStatus::optimal;
                break;
            default:
                throw SolverError("highs: " + result.message);
        }

        const HighsInfo& info = highs.getInfo();
        const HighsSolution& sol = highs.getSolution();
        if (status == HighsModelStatus::kModelEmpty) {
            // No columns or rows: every variable sits at a finite bound.
            result.primal_values.assign(n, 0.0);
            double obj = model.objective_constant();
            for (HighsInt j = 0; j < n; ++j) {
                const auto& v = model.variables()[j];
                const double c = model.objective()[j];
                const bool want_low = (c >= 0) == (model.sense() == Sense::minimize);
                double x = want_low ? v.lower : v.upper;
                if (std::isinf(x)) x = std::isinf(v.lower) ? v.upper : v.lower;
                if (std::isinf(x)) x = 0.0;
                result.primal_values[j] = x;
                obj += c * x;
            }
            result.objective_value = obj;
            result.mip_dual_bound = obj;
            if (!is_mip) {
                result.dual_values.assign(m, 0.0);
                result.reduced_costs = model.objective();
            }
            return result;
        }

        if (!sol.value_valid) {
            if (result.status == SolveStatus::limit) return result;
            throw SolverError("highs reported " + result.message + " without a primal solution");
        }
        result.primal_values = sol.col_value;
        result.objective_value = info.objective_function_value;
        result.mip_dual_bound = is_mip ? info.mip_dual_bound : info.objective_function_value;
        if (!is_mip && result.status == SolveStatus::optimal && sol.dual_valid) {
            result.dual_values = sol.row_dual;
            result.reduced_costs = sol.col_dual;
        }
        return result;
    }
};

}  // namespace

std::unique_ptr<SolverBackend> make_highs_backend() { return std::make_unique<HighsBackend>(); }

}  // namespace gridfire::milp
