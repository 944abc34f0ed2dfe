#include "gridfire/recourse.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace gridfire {

Scenario all_available(const GridInstance& g) { return Scenario(g.num_lines(), 1); }

std::size_t failures(const Scenario& a) {
    return static_cast<std::size_t>(std::count(a.begin(), a.end(), 0));
}

std::string scenario_bits(const Scenario& a) {
    std::string s;
    s.reserve(a.size());
    for (int v : a) s.push_back(v ? '1' : '0');
    return s;
}

Scenario scenario_from_bits(const std::string& bits) {
    Scenario a;
    a.reserve(bits.size());
    for (char c : bits) {
        if (c != '0' && c != '1') throw std::invalid_argument("scenario bitstring may only contain 0 and 1");
        a.push_back(c == '1');
    }
    return a;
}

std::size_t DualSolution::class_size(const GridInstance& g, int cls) {
    if ((cls >= 5 && cls <= 8) || (cls >= 11 && cls <= 18)) return g.num_lines();
    if (cls == 19 || cls == 20) return 4 * g.num_lines();
    return g.num_buses();
}

DualSolution DualSolution::zeros(const GridInstance& g) {
    DualSolution d;
    for (int c = 1; c <= kEtaClasses; ++c) d.eta[c].assign(class_size(g, c), 0.0);
    return d;
}

double DualSolution::max_abs() const {
    double m = 0.0;
    for (const auto& v : eta)
        for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double RecourseResult::shed_p_total() const {
    return std::accumulate(shed_p_minus.begin(), shed_p_minus.end(), 0.0);
}

double RecourseResult::shed_q_total() const {
    return std::accumulate(shed_q_minus.begin(), shed_q_minus.end(), 0.0);
}

RecourseTemplate build_recourse_template(const GridInstance& g) {
    const std::size_t nb = g.num_buses(), nl = g.num_lines(), ns = g.substations.size();
    RecourseTemplate t;
    auto add_cols = [&](const char* name, std::size_t count, auto id_of, double cost) {
        const std::size_t first = t.cost.size();
        for (std::size_t i = 0; i < count; ++i) {
            t.column_names.push_back(std::string(name) + "[" + std::to_string(id_of(i)) + "]");
            t.cost.push_back(cost);
        }
        return first;
    };
    auto line_id = [&](std::size_t l) { return g.lines[l].id; };
    auto bus_id = [&](std::size_t b) { return g.buses[b].id; };
    auto sub_bus = [&](std::size_t s) { return g.substations[s].bus; };
    t.col_fp = add_cols("fp", nl, line_id, 0.0);
    t.col_fq = add_cols("fq", nl, line_id, 0.0);
    t.col_p = add_cols("p_tr", ns, sub_bus, 0.0);
    for (std::size_t s = 0; s < ns; ++s) t.cost[t.col_p + s] = g.substations[s].energy_cost;
    t.col_q = add_cols("q_tr", ns, sub_bus, 0.0);
    t.col_v = add_cols("v", nb, bus_id, 0.0);
    t.col_dp_minus = add_cols("dp_minus", nb, bus_id, g.loss_cost);
    t.col_dp_plus = add_cols("dp_plus", nb, bus_id, g.loss_cost);
    t.col_dq_minus = add_cols("dq_minus", nb, bus_id, g.loss_cost);
    t.col_dq_plus = add_cols("dq_plus", nb, bus_id, g.loss_cost);

    auto row = [&](int cls, std::size_t index, bool eq, std::vector<std::pair<std::size_t, double>> terms,
                   double h0) -> RecourseRow& {
        RecourseRow r;
        r.cls = cls;
        r.index = index;
        r.equality = eq;
        r.terms = std::move(terms);
        r.h0 = h0;
        t.rows.push_back(std::move(r));
        return t.rows.back();
    };

    // Balances (1-4).
    for (std::size_t b = 0; b < nb; ++b) {
        std::vector<std::pair<std::size_t, double>> tp, tq;
        for (std::size_t l = 0; l < nl; ++l) {
            if (g.to_index(l) == b) {
                tp.emplace_back(t.col_fp + l, 1.0);
                tq.emplace_back(t.col_fq + l, 1.0);
            }
            if (g.from_index(l) == b) {
                tp.emplace_back(t.col_fp + l, -1.0);
                tq.emplace_back(t.col_fq + l, -1.0);
            }
        }
        const auto sub = g.substation_at(b);
        if (sub) {
            tp.emplace_back(t.col_p + *sub, 1.0);
            tq.emplace_back(t.col_q + *sub, 1.0);
        }
        tp.emplace_back(t.col_dp_plus + b, -1.0);
        tp.emplace_back(t.col_dp_minus + b, 1.0);
        tq.emplace_back(t.col_dq_plus + b, -1.0);
        tq.emplace_back(t.col_dq_minus + b, 1.0);
        row(sub ? 1 : 3, b, true, std::move(tp), g.buses[b].demand_p);
        row(sub ? 2 : 4, b, true, std::move(tq), g.buses[b].demand_q());
    }

    // Voltage drops (5-8), flow boxes (11-18), octagon (19-20).
    for (std::size_t l = 0; l < nl; ++l) {
        const auto& line = g.lines[l];
        const std::size_t vf = t.col_v + g.from_index(l), vt = t.col_v + g.to_index(l);
        const std::size_t fp = t.col_fp + l, fq = t.col_fq + l;
        const std::vector<std::pair<std::size_t, double>> rise{
            {vf, -1.0}, {vt, 1.0}, {fp, 2.0 * line.r}, {fq, 2.0 * line.x}};
        const std::vector<std::pair<std::size_t, double>> fall{
            {vf, 1.0}, {vt, -1.0}, {fp, -2.0 * line.r}, {fq, -2.0 * line.x}};
        const double big_m = voltage_big_m(g, l);
        if (line.switchable) {
            for (auto [cls, terms] : {std::pair{5, rise}, std::pair{6, fall}}) {
                auto& r = row(cls, l, false, terms, 2.0 * big_m);
                r.a_coef = -big_m;
                r.z_coef = -big_m;
                r.line = l;
            }
            int cls = 11;
            for (std::size_t col : {fp, fq})
                for (double sign : {-1.0, 1.0}) {
                    auto& r = row(cls++, l, false, {{col, sign}}, 0.0);
                    r.z_coef = line.f_max;
                    r.line = l;
                }
        } else {
            for (auto [cls, terms] : {std::pair{7, rise}, std::pair{8, fall}}) {
                auto& r = row(cls, l, false, terms, big_m);
                r.a_coef = -big_m;
                r.line = l;
            }
        }
        int cls = 15;
        for (std::size_t col : {fp, fq})
            for (double sign : {-1.0, 1.0}) {
                auto& r = row(cls++, l, false, {{col, sign}}, 0.0);
                r.a_coef = line.f_max;
                r.line = l;
            }
        const auto& sectors = octagon_sectors();
        for (int e = 1; e <= 4; ++e) {
            const auto& sec = sectors[e - 1];
            const std::size_t slot = 4 * l + static_cast<std::size_t>(e - 1);
            row(19, slot, false, {{fq, 1.0}, {fp, -sec.slope}}, line.f_max * sec.offset);
            row(20, slot, false, {{fq, -1.0}, {fp, -sec.slope}}, line.f_max * sec.offset);
        }
    }

    // Voltage box (9-10), injections (21-25), shed (26-31).
    for (std::size_t b = 0; b < nb; ++b) {
        const auto& bus = g.buses[b];
        row(9, b, false, {{t.col_v + b, -1.0}}, -bus.v_min * bus.v_min);
        row(10, b, false, {{t.col_v + b, 1.0}}, bus.v_max * bus.v_max);
        if (auto s = g.substation_at(b)) {
            const auto& sub = g.substations[*s];
            row(21, b, false, {{t.col_p + *s, -1.0}}, 0.0);
            row(22, b, false, {{t.col_p + *s, 1.0}}, sub.post_p_max());
            row(23, b, false, {{t.col_q + *s, -1.0}}, -sub.post_q_min());
            row(24, b, false, {{t.col_q + *s, 1.0}}, sub.post_q_max());
            row(25, b, true, {{t.col_v + b, 1.0}}, sub.v_ref * sub.v_ref);
        }
        row(26, b, false, {{t.col_dp_plus + b, -1.0}}, 0.0);
        row(27, b, false, {{t.col_dp_minus + b, -1.0}}, 0.0);
        row(28, b, false, {{t.col_dq_plus + b, -1.0}}, 0.0);
        row(29, b, false, {{t.col_dq_minus + b, -1.0}}, 0.0);
        row(30, b, false, {{t.col_dp_minus + b, 1.0}}, bus.demand_p);
        row(31, b, false, {{t.col_dq_minus + b, 1.0}}, bus.demand_q());
    }
    return t;
}

RecourseEvaluator::RecourseEvaluator(const GridInstance& g) : g_(&g), tmpl_(build_recourse_template(g)) {}

RecourseResult RecourseEvaluator::evaluate(const Switching& z_in, const Scenario& a,
                                           const milp::SolverParams& params) const {
    const GridInstance& g = *g_;
    const Switching z = normalize_switching(g, z_in);
    if (a.size() != g.num_lines()) throw PreconditionError("scenario size does not match the line count");

    milp::ModelBuilder m;
    std::vector<milp::VarId> cols;
    cols.reserve(tmpl_.num_columns());
    for (std::size_t j = 0; j < tmpl_.num_columns(); ++j) {
        cols.push_back(m.add_continuous(tmpl_.column_names[j], -milp::kInf, milp::kInf));
        m.add_objective(cols.back(), tmpl_.cost[j]);
    }
    for (std::size_t i = 0; i < tmpl_.rows.size(); ++i) {
        const auto& r = tmpl_.rows[i];
        milp::LinearExpr e;
        for (const auto& [col, coef] : r.terms) e.add(cols[col], coef);
        m.add_constraint(DualSolution::class_name(r.cls) + "#" + std::to_string(i), e,
                         r.equality ? milp::Relation::equal : milp::Relation::less_equal, r.rhs(z, a));
    }
    const auto res = milp::solve(m, params);
    if (res.status == milp::SolveStatus::infeasible || res.status == milp::SolveStatus::unbounded)
        throw milp::SolverError(std::string("recourse LP ") + milp::to_string(res.status) +
                                ": this indicates a modelling error since shedding is always feasible");
    if (!res.optimal() || !res.has_duals())
        throw milp::SolverError("recourse LP did not reach optimality: " + res.message);

    RecourseResult out;
    out.cost = res.objective_value;
    out.dual = DualSolution::zeros(g);
    for (std::size_t i = 0; i < tmpl_.rows.size(); ++i) {
        const auto& r = tmpl_.rows[i];
        double eta = -res.dual_values[i];
        if (!r.equality && eta < 0.0) eta = 0.0;  // clip solver noise on inequality duals
        out.dual.eta[r.cls][r.index] = eta == 0.0 ? 0.0 : eta;
    }
    auto slice = [&](std::size_t first, std::size_t n) {
        return std::vector<double>(res.primal_values.begin() + static_cast<std::ptrdiff_t>(first),
                                   res.primal_values.begin() + static_cast<std::ptrdiff_t>(first + n));
    };
    out.f_p = slice(tmpl_.col_fp, g.num_lines());
    out.f_q = slice(tmpl_.col_fq, g.num_lines());
    out.shed_p_minus = slice(tmpl_.col_dp_minus, g.num_buses());
    out.shed_p_plus = slice(tmpl_.col_dp_plus, g.num_buses());
    out.shed_q_minus = slice(tmpl_.col_dq_minus, g.num_buses());
    out.shed_q_plus = slice(tmpl_.col_dq_plus, g.num_buses());
    return out;
}

RecourseResult evaluate_recourse(const GridInstance& g, const Switching& z, const Scenario& a,
                                 const milp::SolverParams& params) {
    return RecourseEvaluator(g).evaluate(z, a, params);
}

double DualAffine::at(const Switching& z) const {
    double v = constant;
    for (std::size_t l = 0; l < z_coef.size(); ++l) v += z_coef[l] * z[l];
    return v;
}

DualAffine dual_affine_in_z(const GridInstance& g, const DualSolution& dual, const Scenario& a) {
    const auto& eta = dual.eta;
    DualAffine out;
    out.z_coef.assign(g.num_lines(), 0.0);
    double c = 0.0;
    for (std::size_t b = 0; b < g.num_buses(); ++b) {
        const auto& bus = g.buses[b];
        const double d = bus.demand_p, dq = bus.demand_q();
        if (auto s = g.substation_at(b)) {
            const auto& sub = g.substations[*s];
            c += -d * eta[1][b] - dq * eta[2][b] - sub.post_p_max() * eta[22][b] + sub.post_q_min() * eta[23][b] -
                 sub.post_q_max() * eta[24][b] - sub.v_ref * sub.v_ref * eta[25][b];
        } else {
            c += -d * eta[3][b] - dq * eta[4][b];
        }
        c += bus.v_min * bus.v_min * eta[9][b] - bus.v_max * bus.v_max * eta[10][b] - d * eta[30][b] -
             dq * eta[31][b];
    }
    const auto& sectors = octagon_sectors();
    for (std::size_t l = 0; l < g.num_lines(); ++l) {
        const auto& line = g.lines[l];
        const double big_m = voltage_big_m(g, l);
        const double down = 1.0 - a[l];
        if (line.switchable) {
            // -((1-a)M + (1-z)M)(eta5 + eta6) - z F (eta11..14)
            const double e56 = eta[5][l] + eta[6][l];
            c += -(down * big_m + big_m) * e56;
            out.z_coef[l] = big_m * e56 - line.f_max * (eta[11][l] + eta[12][l] + eta[13][l] + eta[14][l]);
        } else {
            c += -down * big_m * (eta[7][l] + eta[8][l]);
        }
        c += -a[l] * line.f_max * (eta[15][l] + eta[16][l] + eta[17][l] + eta[18][l]);
        for (int e = 1; e <= 4; ++e) {
            const std::size_t slot = 4 * l + static_cast<std::size_t>(e - 1);
            const auto& sec = sectors[e - 1];
            c += line.f_max * (sec.slope * std::cos(e * std::numbers::pi / 4) - std::sin(e * std::numbers::pi / 4)) *
                 (eta[19][slot] + eta[20][slot]);
        }
    }
    out.constant = c;
    return out;
}

double dual_objective(const GridInstance& g, const DualSolution& dual, const Switching& z, const Scenario& a) {
    return dual_affine_in_z(g, dual, a).at(normalize_switching(g, z));
}

bool in_support(const GridInstance& g, const Scenario& a, std::size_t k) {
    if (a.size() != g.num_lines()) return false;
    for (int v : a)
        if (v != 0 && v != 1) return false;
    return failures(a) <= k;
}

}  // namespace gridfire
