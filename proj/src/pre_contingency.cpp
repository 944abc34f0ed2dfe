#include "gridfire/pre_contingency.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace gridfire {

using milp::LinearExpr;
using milp::Relation;

const std::array<OctagonSector, 4>& octagon_sectors() {
    static const std::array<OctagonSector, 4> sectors = [] {
        std::array<OctagonSector, 4> s{};
        const double q = std::numbers::pi / 4.0;
        for (int e = 1; e <= 4; ++e) {
            const double slope = 1.0 / std::tan((0.5 - e) * q);
            s[e - 1] = {slope, std::sin(e * q) - slope * std::cos(e * q)};
        }
        return s;
    }();
    return sectors;
}

double voltage_big_m(const GridInstance& g, std::size_t line) {
    double vmax_sq = 0.0;
    double vmin_sq = std::numeric_limits<double>::infinity();
    for (const auto& b : g.buses) {
        vmax_sq = std::max(vmax_sq, b.v_max * b.v_max);
        vmin_sq = std::min(vmin_sq, b.v_min * b.v_min);
    }
    const auto& l = g.lines.at(line);
    return (vmax_sq - vmin_sq) + 2.0 * (std::abs(l.r) + std::abs(l.x)) * l.f_max;
}

Switching initial_switching(const GridInstance& g) {
    Switching z(g.num_lines(), 1);
    for (std::size_t l = 0; l < g.num_lines(); ++l)
        if (g.lines[l].switchable) z[l] = g.lines[l].initial_closed ? 1 : 0;
    return z;
}

Switching normalize_switching(const GridInstance& g, Switching z) {
    if (z.size() != g.num_lines())
        throw PreconditionError("switching vector has " + std::to_string(z.size()) + " entries, expected " +
                                std::to_string(g.num_lines()));
    for (std::size_t l = 0; l < z.size(); ++l) {
        if (!g.lines[l].switchable) z[l] = 1;
        else if (z[l] != 0 && z[l] != 1)
            throw PreconditionError("line " + std::to_string(g.lines[l].id) + ": switching status must be 0 or 1");
    }
    return z;
}

void check_switching(const GridInstance& g, const Switching& z) {
    const Switching zn = normalize_switching(g, z);
    for (const auto& pattern : g.forbidden_patterns) {
        const bool all_closed =
            std::all_of(pattern.begin(), pattern.end(), [&](std::size_t l) { return zn[l] == 1; });
        if (all_closed && !pattern.empty()) {
            std::string ids;
            for (std::size_t l : pattern) ids += (ids.empty() ? "" : ",") + std::to_string(g.lines[l].id);
            throw PreconditionError("switching closes forbidden pattern {" + ids + "}");
        }
    }
}

namespace {

std::string tag(const char* name, int id) { return std::string(name) + "[" + std::to_string(id) + "]"; }

}  // namespace

FirstStageHandles build_first_stage(const GridInstance& g, milp::ModelBuilder& m, const FirstStageOptions& opt) {
    const std::size_t nb = g.num_buses();
    const std::size_t nl = g.num_lines();
    std::optional<Switching> fixed;
    if (opt.fixed_z) {
        check_switching(g, *opt.fixed_z);
        fixed = normalize_switching(g, *opt.fixed_z);
    }

    FirstStageHandles h;
    h.z.resize(nl);
    h.y.resize(nl);
    for (std::size_t l = 0; l < nl; ++l) {
        const auto& line = g.lines[l];
        h.f_p.push_back(m.add_continuous(tag("fp", line.id), -line.f_max, line.f_max));
        h.f_q.push_back(m.add_continuous(tag("fq", line.id), -line.f_max, line.f_max));
        if (line.switchable) {
            h.z[l] = m.add_binary(tag("z", line.id));
            h.y[l] = m.add_binary(tag("y", line.id));
            if (fixed) m.fix(*h.z[l], (*fixed)[l]);
        }
    }
    for (const auto& s : g.substations) {
        h.p_tr.push_back(m.add_continuous(tag("p_tr", s.bus), 0.0, s.p_max));
        h.q_tr.push_back(m.add_continuous(tag("q_tr", s.bus), s.q_min, s.q_max));
    }
    for (std::size_t b = 0; b < nb; ++b) {
        const auto& bus = g.buses[b];
        double lo = bus.v_min * bus.v_min;
        double hi = bus.v_max * bus.v_max;
        if (auto s = g.substation_at(b)) lo = hi = g.substations[*s].v_ref * g.substations[*s].v_ref;
        h.v_sq.push_back(m.add_continuous(tag("v", bus.id), lo, hi));
        h.shed_p_minus.push_back(m.add_continuous(tag("dp_minus", bus.id), 0.0, bus.demand_p));
        h.shed_p_plus.push_back(m.add_continuous(tag("dp_plus", bus.id)));
        h.shed_q_minus.push_back(m.add_continuous(tag("dq_minus", bus.id), 0.0, bus.demand_q()));
        h.shed_q_plus.push_back(m.add_continuous(tag("dq_plus", bus.id)));
    }

    // Power balance per bus.
    std::vector<LinearExpr> bal_p(nb), bal_q(nb);
    for (std::size_t l = 0; l < nl; ++l) {
        const std::size_t fr = g.from_index(l), to = g.to_index(l);
        bal_p[to].add(h.f_p[l], 1.0);
        bal_p[fr].add(h.f_p[l], -1.0);
        bal_q[to].add(h.f_q[l], 1.0);
        bal_q[fr].add(h.f_q[l], -1.0);
    }
    for (std::size_t b = 0; b < nb; ++b) {
        const auto& bus = g.buses[b];
        if (auto s = g.substation_at(b)) {
            bal_p[b].add(h.p_tr[*s], 1.0);
            bal_q[b].add(h.q_tr[*s], 1.0);
        }
        bal_p[b].add(h.shed_p_plus[b], -1.0).add(h.shed_p_minus[b], 1.0);
        bal_q[b].add(h.shed_q_plus[b], -1.0).add(h.shed_q_minus[b], 1.0);
        m.add_constraint(tag("bal_p", bus.id), bal_p[b], Relation::equal, bus.demand_p);
        m.add_constraint(tag("bal_q", bus.id), bal_q[b], Relation::equal, bus.demand_q());
        h.balance_rows += 2;
    }

    // Voltage drops, switch gates, octagon.
    for (std::size_t l = 0; l < nl; ++l) {
        const auto& line = g.lines[l];
        const auto fr = h.v_sq[g.from_index(l)], to = h.v_sq[g.to_index(l)];
        LinearExpr drop;  // v_fr - v_to - 2(R fp + X fq)
        drop.add(fr, 1.0).add(to, -1.0).add(h.f_p[l], -2.0 * line.r).add(h.f_q[l], -2.0 * line.x);
        if (line.switchable) {
            const double big_m = voltage_big_m(g, l);
            LinearExpr up;
            for (const auto& [v, c] : drop.terms) up.add(v, -c);
            up.add(*h.z[l], big_m);
            LinearExpr dn = drop;
            dn.add(*h.z[l], big_m);
            m.add_constraint(tag("vdrop_up", line.id), up, Relation::less_equal, big_m);
            m.add_constraint(tag("vdrop_dn", line.id), dn, Relation::less_equal, big_m);
            for (auto [f, name] : {std::pair{h.f_p[l], "p"}, std::pair{h.f_q[l], "q"}}) {
                m.add_constraint(tag((std::string("gate_") + name + "_hi").c_str(), line.id),
                                 LinearExpr{}.add(f, 1.0).add(*h.z[l], -line.f_max), Relation::less_equal, 0.0);
                m.add_constraint(tag((std::string("gate_") + name + "_lo").c_str(), line.id),
                                 LinearExpr{}.add(f, -1.0).add(*h.z[l], -line.f_max), Relation::less_equal, 0.0);
            }
        } else {
            m.add_constraint(tag("vdrop", line.id), drop, Relation::equal, 0.0);
        }
        const auto& sectors = octagon_sectors();
        for (int e = 1; e <= 4; ++e) {
            const auto& sec = sectors[e - 1];
            for (int sign : {1, -1}) {
                LinearExpr row;
                row.add(h.f_q[l], sign).add(h.f_p[l], -sec.slope);
                const std::string name =
                    "oct" + std::string(sign > 0 ? "+" : "-") + std::to_string(e) + "[" + std::to_string(line.id) + "]";
                m.add_constraint(name, row, Relation::less_equal, line.f_max * sec.offset);
                ++h.octagon_rows;
            }
        }
    }

    // Switching actions and forbidden patterns.
    for (std::size_t l = 0; l < nl; ++l) {
        if (!g.lines[l].switchable) continue;
        const double z0 = g.lines[l].initial_closed ? 1.0 : 0.0;
        m.add_constraint(tag("act_on", g.lines[l].id), LinearExpr{}.add(*h.y[l], 1.0).add(*h.z[l], -1.0),
                         Relation::greater_equal, -z0);
        m.add_constraint(tag("act_off", g.lines[l].id), LinearExpr{}.add(*h.y[l], 1.0).add(*h.z[l], 1.0),
                         Relation::greater_equal, z0);
    }
    for (std::size_t k = 0; k < g.forbidden_patterns.size(); ++k) {
        LinearExpr row;
        for (std::size_t l : g.forbidden_patterns[k]) row.add(*h.z[l], 1.0);
        m.add_constraint("forbid[" + std::to_string(k) + "]", row, Relation::less_equal,
                         static_cast<double>(g.forbidden_patterns[k].size()) - 1.0);
    }

    for (std::size_t s = 0; s < g.substations.size(); ++s) m.add_objective(h.p_tr[s], g.substations[s].energy_cost);
    for (std::size_t b = 0; b < nb; ++b)
        for (auto v : {h.shed_p_minus[b], h.shed_p_plus[b], h.shed_q_minus[b], h.shed_q_plus[b]})
            m.add_objective(v, g.loss_cost);
    for (std::size_t l = 0; l < nl; ++l)
        if (h.y[l]) m.add_objective(*h.y[l], g.lines[l].switch_cost);
    return h;
}

FirstStageSolution extract_first_stage(const GridInstance& g, const FirstStageHandles& h,
                                       const milp::SolveResult& result) {
    if (!result.optimal())
        throw milp::SolverError(std::string("first-stage model not optimal: ") + milp::to_string(result.status));
    FirstStageSolution s;
    const std::size_t nl = g.num_lines(), nb = g.num_buses();
    s.z_sw.assign(nl, 1);
    s.y_sw.assign(nl, 0);
    for (std::size_t l = 0; l < nl; ++l) {
        if (h.z[l]) {
            s.z_sw[l] = result.value(*h.z[l]) > 0.5 ? 1 : 0;
            const int z0 = g.lines[l].initial_closed ? 1 : 0;
            s.y_sw[l] = s.z_sw[l] != z0 ? 1 : 0;
            s.cost_switch += g.lines[l].switch_cost * s.y_sw[l];
        }
        s.f_p.push_back(result.value(h.f_p[l]));
        s.f_q.push_back(result.value(h.f_q[l]));
    }
    for (std::size_t k = 0; k < g.substations.size(); ++k) {
        s.p_tr.push_back(result.value(h.p_tr[k]));
        s.q_tr.push_back(result.value(h.q_tr[k]));
        s.cost_energy += g.substations[k].energy_cost * s.p_tr.back();
    }
    for (std::size_t b = 0; b < nb; ++b) {
        s.v_sq.push_back(result.value(h.v_sq[b]));
        s.shed_p_minus.push_back(result.value(h.shed_p_minus[b]));
        s.shed_p_plus.push_back(result.value(h.shed_p_plus[b]));
        s.shed_q_minus.push_back(result.value(h.shed_q_minus[b]));
        s.shed_q_plus.push_back(result.value(h.shed_q_plus[b]));
        s.cost_shed += g.loss_cost *
                       (s.shed_p_minus[b] + s.shed_p_plus[b] + s.shed_q_minus[b] + s.shed_q_plus[b]);
    }
    return s;
}

FirstStageSolution solve_first_stage(const GridInstance& g, const FirstStageOptions& opt,
                                     const milp::SolverParams& params) {
    milp::ModelBuilder m;
    const auto h = build_first_stage(g, m, opt);
    return extract_first_stage(g, h, milp::solve(m, params));
}

}  // namespace gridfire
