#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gridfire::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class ModelError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Raised when the backend cannot produce an answer (numerical trouble,
/// missing backend). Carries the backend's message.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct VarId {
    std::size_t index = 0;
    bool operator==(const VarId&) const = default;
};

struct RowId {
    std::size_t index = 0;
    bool operator==(const RowId&) const = default;
};

enum class Sense { minimize, maximize };
enum class Relation { less_equal, equal, greater_equal };
enum class VarType { continuous, binary };

struct LinearExpr {
    std::vector<std::pair<VarId, double>> terms;
    double constant = 0.0;

    LinearExpr& add(VarId v, double coef) {
        if (coef != 0.0) terms.emplace_back(v, coef);
        return *this;
    }
    LinearExpr& add_constant(double c) {
        constant += c;
        return *this;
    }
};

struct Variable {
    std::string name;
    VarType type = VarType::continuous;
    double lower = 0.0;
    double upper = kInf;
};

/// A linear relation `expr (<=|=|>=) rhs`. Constants inside `expr` are
/// folded into the right-hand side when the row is stored.
struct Constraint {
    std::string name;
    std::vector<std::pair<VarId, double>> terms;
    Relation relation = Relation::less_equal;
    double rhs = 0.0;
};

class ModelBuilder {
public:
    VarId add_continuous(std::string name, double lower = 0.0, double upper = kInf);
    VarId add_binary(std::string name);
    RowId add_constraint(std::string name, const LinearExpr& expr, Relation relation, double rhs);

    void set_sense(Sense sense) { sense_ = sense; }
    void set_objective(Sense sense, const LinearExpr& expr);
    void add_objective(VarId v, double coef);
    void add_objective_constant(double c) { objective_constant_ += c; }

    void set_bounds(VarId v, double lower, double upper);
    void fix(VarId v, double value) { set_bounds(v, value, value); }

    Sense sense() const { return sense_; }
    const std::vector<Variable>& variables() const { return variables_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    const std::vector<double>& objective() const { return objective_; }
    double objective_constant() const { return objective_constant_; }
    const Variable& variable(VarId v) const { return variables_.at(v.index); }
    const Constraint& constraint(RowId r) const { return constraints_.at(r.index); }

    std::size_t num_variables() const { return variables_.size(); }
    std::size_t num_constraints() const { return constraints_.size(); }
    bool has_integers() const;

    VarId var(const std::string& name) const;
    RowId row(const std::string& name) const;
    bool has_var(const std::string& name) const { return var_names_.count(name) > 0; }
    bool has_row(const std::string& name) const { return row_names_.count(name) > 0; }

private:
    Sense sense_ = Sense::minimize;
    std::vector<Variable> variables_;
    std::vector<double> objective_;
    double objective_constant_ = 0.0;
    std::vector<Constraint> constraints_;
    std::unordered_map<std::string, std::size_t> var_names_;
    std::unordered_map<std::string, std::size_t> row_names_;
};

enum class SolveStatus { optimal, infeasible, unbounded, limit };

const char* to_string(SolveStatus s);

/// Backend parameters. Tolerances are absolute.
struct SolverParams {
    double feasibility_tolerance = 1e-8;
    double optimality_tolerance = 1e-8;
    double time_limit = kInf;  // seconds
    double mip_rel_gap = 1e-9;
    double mip_abs_gap = 1e-9;
    int threads = 1;
    bool verbose = false;
};

/// Duals follow the shadow-price convention: dual(row) = d(objective)/d(rhs)
/// for the model's own sense; reduced costs likewise for column bounds.
struct SolveResult {
    SolveStatus status = SolveStatus::limit;
    double objective_value = 0.0;
    double mip_dual_bound = 0.0;  // equals objective_value for LPs
    std::vector<double> primal_values;
    std::vector<double> dual_values;   // empty unless pure LP and optimal
    std::vector<double> reduced_costs;  // empty unless pure LP and optimal
    std::string message;

    bool optimal() const { return status == SolveStatus::optimal; }
    bool has_duals() const { return !dual_values.empty(); }
    double value(VarId v) const { return primal_values.at(v.index); }
    double dual(RowId r) const { return dual_values.at(r.index); }
    double reduced_cost(VarId v) const { return reduced_costs.at(v.index); }

    std::unordered_map<std::string, double> primal_map(const ModelBuilder& m) const;
    std::unordered_map<std::string, double> dual_map(const ModelBuilder& m) const;
};

/// Adapter contract for an exact LP/MILP backend.
class SolverBackend {
public:
    virtual ~SolverBackend() = default;
    virtual std::string name() const = 0;
    virtual SolveResult solve(const ModelBuilder& model, const SolverParams& params) = 0;
};

std::unique_ptr<SolverBackend> make_highs_backend();
std::unique_ptr<SolverBackend> make_default_backend();

SolveResult solve(const ModelBuilder& model, const SolverParams& params = {});

/// Dual objective of an optimal LP solve reconstructed from row duals and
/// reduced costs: sum of dual * active bound plus the objective constant.
double dual_objective(const ModelBuilder& model, const SolveResult& result);

}  // namespace gridfire::milp
