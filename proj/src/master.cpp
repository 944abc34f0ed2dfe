#include "gridfire/master.hpp"

#include <cmath>
#include <string>

namespace gridfire {

using milp::LinearExpr;
using milp::Relation;

CutForm cut_form(const GridInstance& g, const OptimalityCut& cut) {
    const DualAffine aff = dual_affine_in_z(g, cut.dual, cut.scenario);
    CutForm f;
    f.constant = aff.constant;
    f.z_coef = aff.z_coef;
    for (std::size_t l = 0; l < cut.scenario.size(); ++l)
        if (!cut.scenario[l]) f.failed.push_back(l);
    return f;
}

double evaluate_cut(const GridInstance& g, const OptimalityCut& cut, const Switching& z, const std::vector<double>& psi) {
    const std::size_t nl = g.num_lines();
    if (psi.size() != 2 * nl) throw PreconditionError("psi must have 2|L| entries");
    const CutForm f = cut_form(g, cut);
    const Switching zn = normalize_switching(g, z);
    double v = f.constant;
    for (std::size_t l = 0; l < nl; ++l) v += f.z_coef[l] * zn[l];
    for (std::size_t l : f.failed) v -= psi[l] - psi[nl + l];
    return v;
}

double default_psi_big_m(const GridInstance& g) {
    double shed = 0.0;
    for (const auto& b : g.buses) shed += b.demand_p + b.demand_q();
    double energy = 0.0;
    for (const auto& s : g.substations) {
        shed += std::max(0.0, s.post_q_min()) + std::max(0.0, -s.post_q_max());
        energy += s.energy_cost * s.post_p_max();
    }
    return std::max(1.0, g.loss_cost * shed + energy);
}

MasterHandles build_master(const GridInstance& g, const DduConfig& cfg, const std::vector<OptimalityCut>& cuts,
                           milp::ModelBuilder& m) {
    cfg.validate(g);
    const std::size_t nl = g.num_lines();
    MasterHandles h;
    h.first = build_first_stage(g, m);
    h.psi_big_m = cfg.psi_big_m.value_or(default_psi_big_m(g));
    const double big_m = h.psi_big_m;

    for (std::size_t i = 0; i < 2 * nl; ++i) {
        const bool lower_row = i >= nl;
        const int id = g.lines[i % nl].id;
        h.psi.push_back(m.add_continuous((lower_row ? "psi_lo[" : "psi[") + std::to_string(id) + "]", 0.0,
                                         (lower_row && cfg.fix_psi_lower) ? 0.0 : big_m));
    }
    // The all-available scenario has no failed lines, so phi >= H(z, 1) >= 0.
    h.phi = m.add_continuous("phi", 0.0, milp::kInf);
    m.add_objective(h.phi, 1.0);
    for (std::size_t l = 0; l < nl; ++l) m.add_objective(h.psi[l], cfg.gamma[l]);

    h.chi.resize(nl);
    h.xi.resize(nl);
    h.f_plus.resize(nl);
    h.f_minus.resize(nl);
    h.delta.resize(nl);
    h.rho.resize(nl);
    const double s = cfg.expansion_step;
    for (std::size_t l = 0; l < nl; ++l) {
        if (!(cfg.expand_all_lines || cfg.beta[l] > 0.0)) continue;
        const auto& line = g.lines[l];
        const std::string id = std::to_string(line.id);
        const auto fp = m.add_continuous("fp_plus[" + id + "]", 0.0, line.f_max);
        const auto fm = m.add_continuous("fp_minus[" + id + "]", 0.0, line.f_max);
        const auto xi = m.add_binary("xi[" + id + "]");
        const auto chi = m.add_continuous("chi[" + id + "]", -milp::kInf, milp::kInf);
        h.f_plus[l] = fp;
        h.f_minus[l] = fm;
        h.xi[l] = xi;
        h.chi[l] = chi;
        m.add_objective(chi, cfg.beta[l]);

        m.add_constraint("split[" + id + "]", LinearExpr{}.add(h.first.f_p[l], 1.0).add(fp, -1.0).add(fm, 1.0),
                         Relation::equal, 0.0);
        m.add_constraint("plus_on[" + id + "]", LinearExpr{}.add(fp, 1.0).add(xi, -line.f_max), Relation::less_equal,
                         0.0);
        m.add_constraint("minus_on[" + id + "]", LinearExpr{}.add(fm, 1.0).add(xi, line.f_max), Relation::less_equal,
                         line.f_max);
        LinearExpr grid = LinearExpr{}.add(fp, 1.0).add(fm, 1.0);
        LinearExpr chi_def = LinearExpr{}.add(chi, 1.0);
        for (int e = 1; e <= cfg.expansion_digits[l]; ++e) {
            const std::string tag = "[" + id + "," + std::to_string(e) + "]";
            const double weight = s * std::ldexp(1.0, e - 1);
            const auto d = m.add_binary("delta" + tag);
            const auto r = m.add_continuous("rho" + tag, -big_m, big_m);
            h.delta[l].push_back(d);
            h.rho[l].push_back(r);
            grid.add(d, -weight);
            chi_def.add(r, -weight);
            // rho = psi_l * delta via big-M on both sides
            m.add_constraint("rho_hi" + tag, LinearExpr{}.add(h.psi[l], 1.0).add(r, -1.0).add(d, big_m),
                             Relation::less_equal, big_m);
            m.add_constraint("rho_lo" + tag, LinearExpr{}.add(h.psi[l], 1.0).add(r, -1.0).add(d, -big_m),
                             Relation::greater_equal, -big_m);
            m.add_constraint("rho_on_hi" + tag, LinearExpr{}.add(r, 1.0).add(d, -big_m), Relation::less_equal, 0.0);
            m.add_constraint("rho_on_lo" + tag, LinearExpr{}.add(r, 1.0).add(d, big_m), Relation::greater_equal, 0.0);
        }
        m.add_constraint("grid[" + id + "]", grid, Relation::equal, 0.0);
        m.add_constraint("chi_def[" + id + "]", chi_def, Relation::equal, 0.0);
    }

    for (const auto& cut : cuts) {
        if (cut.scenario.size() != nl) throw PreconditionError("cut scenario size does not match the instance");
        const CutForm f = cut_form(g, cut);
        LinearExpr row;
        row.add(h.phi, 1.0);
        for (std::size_t l = 0; l < nl; ++l)
            if (h.first.z[l] && f.z_coef[l] != 0.0) row.add(*h.first.z[l], -f.z_coef[l]);
        for (std::size_t l : f.failed) row.add(h.psi[l], 1.0).add(h.psi[nl + l], -1.0);
        h.cut_rows.push_back(m.add_constraint("cut[" + std::to_string(h.cut_rows.size()) + ":" +
                                                  std::to_string(cut.id) + "]",
                                              row, Relation::greater_equal, f.constant));
    }
    return h;
}

double MasterSolution::decoded_flow(std::size_t line, double step) const {
    if (!expanded.at(line)) return -1.0;
    double v = 0.0;
    for (std::size_t e = 0; e < delta[line].size(); ++e) v += step * std::ldexp(1.0, static_cast<int>(e)) * delta[line][e];
    return v;
}

MasterSolution solve_master(const GridInstance& g, const DduConfig& cfg, const std::vector<OptimalityCut>& cuts,
                            const milp::SolverParams& params) {
    milp::ModelBuilder m;
    const MasterHandles h = build_master(g, cfg, cuts, m);
    const auto res = milp::solve(m, params);
    if (!res.optimal())
        throw milp::SolverError(std::string("master problem ") + milp::to_string(res.status) + ": " + res.message);

    MasterSolution out;
    out.first_stage = extract_first_stage(g, h.first, res);
    const std::size_t nl = g.num_lines();
    for (auto v : h.psi) out.psi.push_back(std::max(0.0, res.value(v)));
    out.phi = res.value(h.phi);
    out.chi.assign(nl, 0.0);
    out.xi.assign(nl, -1);
    out.delta.assign(nl, {});
    out.rho.assign(nl, {});
    out.expanded.assign(nl, false);
    out.worst_case_term = out.phi;
    for (std::size_t l = 0; l < nl; ++l) {
        if (h.chi[l]) {
            out.expanded[l] = true;
            out.chi[l] = res.value(*h.chi[l]);
            out.xi[l] = res.value(*h.xi[l]) > 0.5 ? 1 : 0;
            for (auto d : h.delta[l]) out.delta[l].push_back(res.value(d) > 0.5 ? 1 : 0);
            for (auto r : h.rho[l]) out.rho[l].push_back(res.value(r));
        } else {
            out.chi[l] = out.psi[l] * std::abs(out.first_stage.f_p[l]);
        }
        out.worst_case_term += cfg.gamma[l] * out.psi[l] + cfg.beta[l] * out.chi[l];
    }
    out.objective = res.objective_value;
    out.lower_bound = std::min(res.mip_dual_bound, res.objective_value);
    return out;
}

}  // namespace gridfire
