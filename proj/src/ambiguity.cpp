#include "gridfire/ambiguity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gridfire/milp.hpp"
#include "gridfire/parallel.hpp"

namespace gridfire {

using json = nlohmann::json;

namespace {

bool is_expanded(const DduConfig& cfg, std::size_t l) { return cfg.expand_all_lines || cfg.beta[l] > 0.0; }

template <class T>
std::vector<T> per_line(const json& node, const GridInstance& g, const char* key) {
    const std::size_t n = g.num_lines();
    auto as_value = [&](const json& v, const std::string& where) -> T {
        if (!v.is_number()) throw ConfigError(std::string(key) + where + ": expected a number");
        if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ConfigError(std::string(key) + where + ": expected an integer");
        }
        return v.get<T>();
    };
    if (node.is_number()) return std::vector<T>(n, as_value(node, ""));
    if (node.is_array()) {
        if (node.size() != n)
            throw ConfigError(std::string(key) + ": array has " + std::to_string(node.size()) + " entries, expected " +
                              std::to_string(n));
        std::vector<T> out;
        for (std::size_t i = 0; i < n; ++i) out.push_back(as_value(node[i], "[" + std::to_string(i) + "]"));
        return out;
    }
    if (node.is_object()) {
        if (!node.contains("default")) throw ConfigError(std::string(key) + ": object form requires a \"default\" entry");
        std::vector<T> out(n, as_value(node["default"], ".default"));
        for (const auto& [k, v] : node.items()) {
            if (k == "default") continue;
            int id = 0;
            try {
                std::size_t pos = 0;
                id = std::stoi(k, &pos);
                if (pos != k.size()) throw std::invalid_argument(k);
            } catch (const std::exception&) {
                throw ConfigError(std::string(key) + ": key '" + k + "' is not a line id");
            }
            std::size_t l = 0;
            try {
                l = g.line_index(id);
            } catch (const InstanceError&) {
                throw ConfigError(std::string(key) + ": line " + k + " does not exist");
            }
            out[l] = as_value(v, "." + k);
        }
        return out;
    }
    throw ConfigError(std::string(key) + ": expected a number, an array or an object");
}

}  // namespace

void DduConfig::validate(const GridInstance& g) const {
    const std::size_t n = g.num_lines();
    if (gamma.size() != n || beta.size() != n || expansion_digits.size() != n)
        throw ConfigError("gamma, beta and expansion_digits must have one entry per line");
    for (std::size_t l = 0; l < n; ++l) {
        const std::string who = "line " + std::to_string(g.lines[l].id) + ": ";
        if (!(gamma[l] >= 0.0 && gamma[l] <= 1.0)) throw ConfigError(who + "gamma must lie in [0, 1]");
        if (!(beta[l] >= 0.0) || !std::isfinite(beta[l])) throw ConfigError(who + "beta must be finite and >= 0");
        if (expansion_digits[l] < 1 || expansion_digits[l] > 40)
            throw ConfigError(who + "expansion_digits must lie in [1, 40]");
        if (is_expanded(*this, l)) {
            const double span = expansion_step * (std::ldexp(1.0, expansion_digits[l]) - 1.0);
            if (span < g.lines[l].f_max * (1.0 - 1e-12))
                throw ConfigError(who + "binary expansion spans " + std::to_string(span) + " < f_max " +
                                  std::to_string(g.lines[l].f_max));
        }
    }
    if (k_budget > n) throw ConfigError("k_budget exceeds the number of lines");
    if (!(expansion_step > 0.0)) throw ConfigError("expansion_step must be > 0");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
    if (psi_big_m && !(*psi_big_m > 0.0)) throw ConfigError("psi_big_m must be > 0");
    if (dual_big_m && !(*dual_big_m > 0.0)) throw ConfigError("dual_big_m must be > 0");
    if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
    if (support_cap < 1) throw ConfigError("support_cap must be >= 1");
}

DduConfig default_config(const GridInstance& g, std::size_t k) {
    DduConfig c;
    const std::size_t n = g.num_lines();
    c.gamma.assign(n, 0.0);
    c.beta.assign(n, 0.0);
    c.expansion_digits.assign(n, 7);
    c.k_budget = k;
    double fmax = 0.0;
    for (const auto& l : g.lines) fmax = std::max(fmax, l.f_max);
    c.expansion_step = fmax > 0.0 ? fmax / 127.0 : 1.0;
    return c;
}

DduConfig parse_ddu_config(const std::string& text, const GridInstance& g) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    static const std::set<std::string> known{"gamma",        "beta",          "k_budget",
                                             "expansion_step", "expansion_digits", "epsilon",
                                             "psi_big_m",    "dual_big_m",    "fix_psi_lower",
                                             "expand_all_lines", "enumerate_subproblem", "max_iterations",
                                             "support_cap"};
    for (const auto& [k, v] : doc.items())
        if (!known.count(k)) throw ConfigError("unknown config key '" + k + "'");
    if (!doc.contains("k_budget")) throw ConfigError("config requires k_budget");
    if (!doc["k_budget"].is_number_integer() || doc["k_budget"].get<long long>() < 0)
        throw ConfigError("k_budget must be a nonnegative integer");

    DduConfig c = default_config(g, doc["k_budget"].get<std::size_t>());
    auto number = [&](const char* key) {
        if (!doc[key].is_number()) throw ConfigError(std::string(key) + ": expected a number");
        return doc[key].get<double>();
    };
    auto boolean = [&](const char* key) {
        if (!doc[key].is_boolean()) throw ConfigError(std::string(key) + ": expected true or false");
        return doc[key].get<bool>();
    };
    if (doc.contains("gamma")) c.gamma = per_line<double>(doc["gamma"], g, "gamma");
    if (doc.contains("beta")) c.beta = per_line<double>(doc["beta"], g, "beta");
    if (doc.contains("expansion_digits")) c.expansion_digits = per_line<int>(doc["expansion_digits"], g, "expansion_digits");
    if (doc.contains("expansion_step")) c.expansion_step = number("expansion_step");
    if (doc.contains("epsilon")) c.epsilon = number("epsilon");
    if (doc.contains("psi_big_m") && !doc["psi_big_m"].is_null()) c.psi_big_m = number("psi_big_m");
    if (doc.contains("dual_big_m") && !doc["dual_big_m"].is_null()) c.dual_big_m = number("dual_big_m");
    if (doc.contains("fix_psi_lower")) c.fix_psi_lower = boolean("fix_psi_lower");
    if (doc.contains("expand_all_lines")) c.expand_all_lines = boolean("expand_all_lines");
    if (doc.contains("enumerate_subproblem")) c.enumerate_subproblem = boolean("enumerate_subproblem");
    if (doc.contains("max_iterations")) {
        if (!doc["max_iterations"].is_number_integer()) throw ConfigError("max_iterations: expected an integer");
        c.max_iterations = doc["max_iterations"].get<int>();
    }
    if (doc.contains("support_cap")) {
        if (!doc["support_cap"].is_number_unsigned()) throw ConfigError("support_cap: expected a positive integer");
        c.support_cap = doc["support_cap"].get<std::size_t>();
    }
    c.validate(g);
    return c;
}

DduConfig load_ddu_config(const std::filesystem::path& path, const GridInstance& g) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_ddu_config(ss.str(), g);
}

std::string ddu_config_to_json(const DduConfig& c, const GridInstance&, int indent) {
    json doc;
    doc["gamma"] = c.gamma;
    doc["beta"] = c.beta;
    doc["k_budget"] = c.k_budget;
    doc["expansion_step"] = c.expansion_step;
    doc["expansion_digits"] = c.expansion_digits;
    doc["epsilon"] = c.epsilon;
    doc["psi_big_m"] = c.psi_big_m ? json(*c.psi_big_m) : json(nullptr);
    doc["dual_big_m"] = c.dual_big_m ? json(*c.dual_big_m) : json(nullptr);
    doc["fix_psi_lower"] = c.fix_psi_lower;
    doc["expand_all_lines"] = c.expand_all_lines;
    doc["enumerate_subproblem"] = c.enumerate_subproblem;
    doc["max_iterations"] = c.max_iterations;
    doc["support_cap"] = c.support_cap;
    return doc.dump(indent);
}

std::uint64_t config_hash(const DduConfig& cfg, const GridInstance& g) {
    return fnv1a64(ddu_config_to_json(cfg, g, -1));
}

std::vector<double> MomentBound::full() const {
    std::vector<double> out = mu_upper;
    out.resize(2 * mu_upper.size(), 0.0);
    return out;
}

MomentBound mean_bound(const DduConfig& cfg, const std::vector<double>& f_p) {
    if (f_p.size() != cfg.gamma.size()) throw PreconditionError("flow vector size does not match the config");
    MomentBound m;
    m.mu_upper.resize(f_p.size());
    for (std::size_t l = 0; l < f_p.size(); ++l) m.mu_upper[l] = cfg.gamma[l] + cfg.beta[l] * std::abs(f_p[l]);
    return m;
}

std::size_t support_size(std::size_t n, std::size_t k) {
    constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
    std::size_t total = 0, binom = 1;  // C(n, j)
    for (std::size_t j = 0; j <= std::min(k, n); ++j) {
        if (j > 0) {
            // binom * (n - j + 1) / j without overflow where possible
            const unsigned __int128 next = static_cast<unsigned __int128>(binom) * (n - j + 1) / j;
            if (next > kMax) return kMax;
            binom = static_cast<std::size_t>(next);
        }
        if (total > kMax - binom) return kMax;
        total += binom;
    }
    return total;
}

std::vector<Scenario> enumerate_support(std::size_t n, std::size_t k, std::size_t cap) {
    if (k > n) throw PreconditionError("k exceeds the number of lines");
    const std::size_t size = support_size(n, k);
    if (size > cap)
        throw SupportCapError("support has " + std::to_string(size) + " scenarios, above the cap of " +
                              std::to_string(cap));
    std::vector<Scenario> out;
    out.reserve(size);
    for (std::size_t j = 0; j <= k; ++j) {
        std::vector<std::size_t> idx(j);
        for (std::size_t i = 0; i < j; ++i) idx[i] = i;
        while (true) {
            Scenario a(n, 1);
            for (std::size_t i : idx) a[i] = 0;
            out.push_back(std::move(a));
            // next combination in lexicographic order
            std::size_t i = j;
            while (i > 0 && idx[i - 1] == n - j + i - 1) --i;
            if (i == 0) break;
            ++idx[i - 1];
            for (std::size_t t = i; t < j; ++t) idx[t] = idx[t - 1] + 1;
        }
    }
    return out;
}

bool failed_set_less(const Scenario& a, const Scenario& b) {
    std::vector<std::size_t> fa, fb;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!a[i]) fa.push_back(i);
    for (std::size_t i = 0; i < b.size(); ++i)
        if (!b[i]) fb.push_back(i);
    return fa < fb;
}

InnerSolution solve_distribution_lp(const std::vector<double>& h, const std::vector<Scenario>& scenarios,
                                    const std::vector<double>& mu) {
    if (h.size() != scenarios.size()) throw PreconditionError("one recourse value per scenario is required");
    const std::size_t n = mu.size();
    milp::ModelBuilder m;
    std::vector<milp::VarId> q;
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
        if (scenarios[s].size() != n) throw PreconditionError("scenario size does not match the moment vector");
        q.push_back(m.add_continuous("q" + std::to_string(s)));
        m.add_objective(q.back(), h[s]);
    }
    m.set_sense(milp::Sense::maximize);
    std::vector<milp::RowId> upper, lower;
    for (std::size_t l = 0; l < n; ++l) {
        milp::LinearExpr up, lo;
        for (std::size_t s = 0; s < scenarios.size(); ++s)
            if (!scenarios[s][l]) {
                up.add(q[s], 1.0);
                lo.add(q[s], -1.0);
            }
        upper.push_back(m.add_constraint("mu_up" + std::to_string(l), up, milp::Relation::less_equal, mu[l]));
        lower.push_back(m.add_constraint("mu_lo" + std::to_string(l), lo, milp::Relation::less_equal, 0.0));
    }
    milp::LinearExpr norm;
    for (auto v : q) norm.add(v, 1.0);
    const auto norm_row = m.add_constraint("norm", norm, milp::Relation::equal, 1.0);

    const auto res = milp::solve(m);
    if (!res.optimal() || !res.has_duals())
        throw milp::SolverError("distribution LP not optimal: " + res.message);
    InnerSolution out;
    out.value = res.objective_value;
    for (auto v : q) out.q.push_back(std::max(0.0, res.value(v)));
    // Shadow prices of a maximisation are the nonnegative dual weights directly.
    for (auto r : upper) out.psi.push_back(std::max(0.0, res.dual(r)));
    for (auto r : lower) out.psi.push_back(std::max(0.0, res.dual(r)));
    out.phi = res.dual(norm_row);
    return out;
}

OracleResult worst_case_expectation_oracle(const GridInstance& g, const DduConfig& cfg, const Switching& z,
                                           const std::vector<double>& f_p, int threads) {
    OracleResult out;
    out.scenarios = enumerate_support(g.num_lines(), cfg.k_budget, cfg.support_cap);
    out.mu_upper = mean_bound(cfg, f_p).mu_upper;
    const RecourseEvaluator eval(g);
    out.h_values.assign(out.scenarios.size(), 0.0);
    parallel_for(out.scenarios.size(), threads,
                 [&](std::size_t s) { out.h_values[s] = eval.evaluate(z, out.scenarios[s]).cost; });
    auto inner = solve_distribution_lp(out.h_values, out.scenarios, out.mu_upper);
    out.value = inner.value;
    out.q = std::move(inner.q);
    out.psi = std::move(inner.psi);
    out.phi = inner.phi;
    return out;
}

InnerDual dualize_inner(const OracleResult& oracle) {
    InnerDual d;
    d.psi = oracle.psi;
    d.phi = oracle.phi;
    d.dual_value = oracle.phi;
    for (std::size_t l = 0; l < oracle.mu_upper.size(); ++l) d.dual_value += oracle.psi[l] * oracle.mu_upper[l];
    return d;
}

}  // namespace gridfire
