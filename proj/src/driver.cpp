#include "gridfire/driver.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace gridfire {

using ojson = nlohmann::ordered_json;

DdroResult solve_ddro(const GridInstance& g, const DduConfig& cfg, const std::vector<OptimalityCut>& warm_cuts,
                      const DdroOptions& opt) {
    cfg.validate(g);
    const auto start = std::chrono::steady_clock::now();
    DdroResult out;
    out.cuts = warm_cuts;
    out.warm_cut_count = warm_cuts.size();
    double lb = -std::numeric_limits<double>::infinity();
    double best_ub = std::numeric_limits<double>::infinity();

    for (int m = 0;; ++m) {
        const MasterSolution master = solve_master(g, cfg, out.cuts);
        lb = std::max(lb, master.lower_bound);
        SubproblemSolution sub =
            solve_subproblem(g, cfg, master.first_stage.z_sw, master.psi, opt.threads);
        const double ub = master.objective - master.phi + sub.objective;
        if (ub < best_ub) {
            best_ub = ub;
            out.solution = master;
            out.worst_case = sub;
        }
        IterationLog entry;
        entry.iteration = m;
        entry.lb = lb;
        entry.ub = ub;
        entry.best_ub = best_ub;
        entry.gap = (best_ub - lb) / std::max(std::abs(best_ub), 1.0);
        entry.scenario_added = sub.scenario;
        entry.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out.log.push_back(entry);
        if (opt.on_iteration) opt.on_iteration(entry);

        out.iterations = m;
        out.lower_bound = lb;
        out.upper_bound = best_ub;
        out.gap = entry.gap;
        if (entry.gap <= cfg.epsilon) {
            out.converged = true;
            break;
        }
        if (m + 1 > cfg.max_iterations) break;
        out.cuts.push_back({m + 1, sub.scenario, std::move(sub.dual)});
    }
    return out;
}

namespace {

constexpr const char* kFormat = "gridfire-cuts";
constexpr int kVersion = 1;
constexpr const char* kConvention =
    "rows are g(x) <= h or g(x) = h; eta >= 0 on inequalities and free on equalities; "
    "cut: phi >= -sum_i h_i(z, a) eta_i - sum_l (psi_l - psi_{L+l}) (1 - a_l)";

}  // namespace

std::string cuts_to_json(const GridInstance& g, const std::vector<OptimalityCut>& cuts, const std::string& config_hash) {
    const auto sig = instance_signature(g);
    ojson doc;
    doc["format"] = kFormat;
    doc["version"] = kVersion;
    doc["signature"] = {{"num_buses", sig.num_buses}, {"num_lines", sig.num_lines}, {"topology_hash", sig.hash_hex()}};
    if (!config_hash.empty()) doc["config_hash"] = config_hash;
    doc["sign_convention"] = kConvention;
    doc["eta_layout"] = "classes 1-4, 9, 10, 21-31 by bus index; 5-8, 11-18 by line index; 19-20 by 4*line + e - 1";
    doc["cuts"] = ojson::array();
    for (const auto& c : cuts) {
        ojson jc;
        jc["iteration"] = c.id;
        jc["scenario"] = scenario_bits(c.scenario);
        ojson eta;
        for (int k = 1; k <= kEtaClasses; ++k) eta[DualSolution::class_name(k)] = c.dual.eta[k];
        jc["eta"] = std::move(eta);
        doc["cuts"].push_back(std::move(jc));
    }
    return doc.dump(1) + "\n";
}

std::vector<OptimalityCut> cuts_from_json(const GridInstance& g, const std::string& text) {
    ojson doc;
    try {
        doc = ojson::parse(text);
    } catch (const ojson::parse_error& e) {
        throw ConfigError(std::string("cut cache is not valid JSON: ") + e.what());
    }
    if (doc.value("format", "") != kFormat) throw ConfigError("not a gridfire cut cache");
    if (doc.value("version", 0) != kVersion) throw ConfigError("unsupported cut cache version");
    const auto sig = instance_signature(g);
    const auto& js = doc.at("signature");
    if (js.at("num_buses").get<std::size_t>() != sig.num_buses || js.at("num_lines").get<std::size_t>() != sig.num_lines ||
        js.at("topology_hash").get<std::string>() != sig.hash_hex())
        throw SignatureError("cut cache signature " + js.dump() + " does not match instance (" +
                             std::to_string(sig.num_buses) + " buses, " + std::to_string(sig.num_lines) +
                             " lines, topology " + sig.hash_hex() + ")");
    std::vector<OptimalityCut> cuts;
    for (const auto& jc : doc.at("cuts")) {
        OptimalityCut c;
        c.id = jc.at("iteration").get<int>();
        c.scenario = scenario_from_bits(jc.at("scenario").get<std::string>());
        if (c.scenario.size() != g.num_lines()) throw ConfigError("cut scenario length does not match the instance");
        c.dual = DualSolution::zeros(g);
        for (int k = 1; k <= kEtaClasses; ++k) {
            auto v = jc.at("eta").at(DualSolution::class_name(k)).get<std::vector<double>>();
            if (v.size() != c.dual.eta[k].size())
                throw ConfigError("cut " + std::to_string(c.id) + ": " + DualSolution::class_name(k) + " has the wrong length");
            c.dual.eta[k] = std::move(v);
        }
        cuts.push_back(std::move(c));
    }
    return cuts;
}

void save_cuts(const GridInstance& g, const std::vector<OptimalityCut>& cuts, const std::filesystem::path& path,
               const std::string& config_hash) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << cuts_to_json(g, cuts, config_hash);
}

std::vector<OptimalityCut> load_cuts(const GridInstance& g, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open cut cache " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return cuts_from_json(g, ss.str());
}

std::string iteration_log_csv(const std::vector<IterationLog>& log) {
    std::ostringstream os;
    os << std::setprecision(12);
    os << "iteration,lb,ub,gap,seconds,best_ub,failed_line_indices\n";
    for (const auto& e : log) {
        std::string failed;
        for (std::size_t l = 0; l < e.scenario_added.size(); ++l)
            if (!e.scenario_added[l]) failed += (failed.empty() ? "" : " ") + std::to_string(l);
        os << e.iteration << ',' << e.lb << ',' << e.ub << ',' << e.gap << ',' << e.seconds << ',' << e.best_ub << ','
           << failed << '\n';
    }
    return os.str();
}

}  // namespace gridfire
