#include "gridfire/milp.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace gridfire::milp {

VarId ModelBuilder::add_continuous(std::string name, double lower, double upper) {
    if (lower > upper) throw ModelError("variable '" + name + "': lower bound exceeds upper bound");
    if (!var_names_.emplace(name, variables_.size()).second)
        throw ModelError("duplicate variable name '" + name + "'");
    variables_.push_back({std::move(name), VarType::continuous, lower, upper});
    objective_.push_back(0.0);
    return VarId{variables_.size() - 1};
}

VarId ModelBuilder::add_binary(std::string name) {
    if (!var_names_.emplace(name, variables_.size()).second)
        throw ModelError("duplicate variable name '" + name + "'");
    variables_.push_back({std::move(name), VarType::binary, 0.0, 1.0});
    objective_.push_back(0.0);
    return VarId{variables_.size() - 1};
}

RowId ModelBuilder::add_constraint(std::string name, const LinearExpr& expr, Relation relation, double rhs) {
    if (!row_names_.emplace(name, constraints_.size()).second)
        throw ModelError("duplicate constraint name '" + name + "'");
    // Merge repeated variables so backends see one entry per column.
    std::map<std::size_t, double> merged;
    for (const auto& [v, coef] : expr.terms) {
        if (v.index >= variables_.size()) {
            row_names_.erase(name);
            throw ModelError("constraint '" + name + "' references an undeclared variable");
        }
        merged[v.index] += coef;
    }
    Constraint c;
    c.name = std::move(name);
    c.relation = relation;
    c.rhs = rhs - expr.constant;
    for (const auto& [index, coef] : merged)
        if (coef != 0.0) c.terms.emplace_back(VarId{index}, coef);
    constraints_.push_back(std::move(c));
    return RowId{constraints_.size() - 1};
}

void ModelBuilder::set_objective(Sense sense, const LinearExpr& expr) {
    sense_ = sense;
    std::fill(objective_.begin(), objective_.end(), 0.0);
    objective_constant_ = expr.constant;
    for (const auto& [v, coef] : expr.terms) add_objective(v, coef);
}

void ModelBuilder::add_objective(VarId v, double coef) {
    if (v.index >= variables_.size()) throw ModelError("objective references an undeclared variable");
    objective_[v.index] += coef;
}

void ModelBuilder::set_bounds(VarId v, double lower, double upper) {
    auto& var = variables_.at(v.index);
    if (lower > upper) throw ModelError("variable '" + var.name + "': lower bound exceeds upper bound");
    var.lower = lower;
    var.upper = upper;
}

bool ModelBuilder::has_integers() const {
    return std::any_of(variables_.begin(), variables_.end(),
                       [](const Variable& v) { return v.type != VarType::continuous; });
}

VarId ModelBuilder::var(const std::string& name) const {
    auto it = var_names_.find(name);
    if (it == var_names_.end()) throw ModelError("unknown variable '" + name + "'");
    return VarId{it->second};
}

RowId ModelBuilder::row(const std::string& name) const {
    auto it = row_names_.find(name);
    if (it == row_names_.end()) throw ModelError("unknown constraint '" + name + "'");
    return RowId{it->second};
}

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::unbounded: return "unbounded";
        case SolveStatus::limit: return "limit";
    }
    return "unknown";
}

std::unordered_map<std::string, double> SolveResult::primal_map(const ModelBuilder& m) const {
    std::unordered_map<std::string, double> out;
    for (std::size_t j = 0; j < primal_values.size() && j < m.num_variables(); ++j)
        out.emplace(m.variables()[j].name, primal_values[j]);
    return out;
}

std::unordered_map<std::string, double> SolveResult::dual_map(const ModelBuilder& m) const {
    std::unordered_map<std::string, double> out;
    for (std::size_t i = 0; i < dual_values.size() && i < m.num_constraints(); ++i)
        out.emplace(m.constraints()[i].name, dual_values[i]);
    return out;
}

std::unique_ptr<SolverBackend> make_default_backend() { return make_highs_backend(); }

SolveResult solve(const ModelBuilder& model, const SolverParams& params) {
    auto backend = make_default_backend();
    return backend->solve(model, params);
}

double dual_objective(const ModelBuilder& model, const SolveResult& result) {
    if (!result.has_duals()) throw ModelError("dual_objective requires an optimal pure-LP result");
    double total = model.objective_constant();
    for (std::size_t i = 0; i < model.num_constraints(); ++i)
        total += result.dual_values[i] * model.constraints()[i].rhs;
    for (std::size_t j = 0; j < model.num_variables(); ++j) {
        const double d = result.reduced_costs[j];
        if (d == 0.0) continue;
        const auto& v = model.variables()[j];
        const double x = result.primal_values[j];
        double bound;
        if (std::isinf(v.lower))
            bound = v.upper;
        else if (std::isinf(v.upper))
            bound = v.lower;
        else
            bound = std::abs(x - v.lower) <= std::abs(x - v.upper) ? v.lower : v.upper;
        if (std::isinf(bound)) bound = x;
        total += d * bound;
    }
    return total;
}

}  // namespace gridfire::milp
