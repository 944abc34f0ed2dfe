#include "gridfire/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gridfire/driver.hpp"
#include "gridfire/montecarlo.hpp"

namespace gridfire {

namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct RunConfig {
    std::string mode;
    std::string instance_path;
    std::string ddu_path;
    std::string warm_start_path;
    std::string solution_path;
    std::string switching_bits;
    std::string out_dir;
    std::uint64_t seed = 1;
    std::size_t samples = 2000;
    int threads = 1;
};

class ToleranceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

struct Provenance {
    InstanceSignature sig;
    std::optional<std::uint64_t> cfg_hash;

    ojson json() const {
        ojson j;
        j["config_hash"] = cfg_hash ? ojson(hex64(*cfg_hash)) : ojson(nullptr);
        j["instance"] = {{"num_buses", sig.num_buses}, {"num_lines", sig.num_lines}, {"topology_hash", sig.hash_hex()}};
        return j;
    }
    std::string csv_comment() const {
        return "# config_hash=" + (cfg_hash ? hex64(*cfg_hash) : std::string("none")) +
               " instance=" + std::to_string(sig.num_buses) + "/" + std::to_string(sig.num_lines) + "/" + sig.hash_hex() +
               "\n";
    }
};

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
}

std::vector<int> failed_ids(const GridInstance& g, const Scenario& a) {
    std::vector<int> ids;
    for (std::size_t l = 0; l < a.size(); ++l)
        if (!a[l]) ids.push_back(g.lines[l].id);
    return ids;
}

int count_actions(const FirstStageSolution& fs) {
    int n = 0;
    for (int y : fs.y_sw) n += y;
    return n;
}

ojson solution_json(const GridInstance& g, const DduConfig& cfg, const DdroResult& r, const Provenance& prov) {
    const auto& fs = r.solution.first_stage;
    ojson j;
    j["provenance"] = prov.json();
    j["status"] = {{"converged", r.converged},   {"iterations", r.iterations}, {"lower_bound", r.lower_bound},
                   {"upper_bound", r.upper_bound}, {"gap", r.gap},           {"epsilon", cfg.epsilon},
                   {"warm_cuts", r.warm_cut_count}, {"cuts", r.cuts.size()}};
    j["costs"] = {{"energy", fs.cost_energy},
                  {"switching", fs.cost_switch},
                  {"deficit", fs.cost_shed},
                  {"worst_case_expected_value", r.upper_bound - fs.total_cost()},
                  {"total", r.upper_bound}};
    j["switching_actions"] = count_actions(fs);
    ojson sw = ojson::array();
    for (std::size_t l = 0; l < g.num_lines(); ++l) {
        const auto& line = g.lines[l];
        const bool init = !line.switchable || line.initial_closed;
        const bool fin = fs.z_sw[l] == 1;
        sw.push_back({{"line", line.id},
                      {"from", line.from_bus},
                      {"to", line.to_bus},
                      {"switchable", line.switchable},
                      {"initial", init ? "closed" : "open"},
                      {"final", fin ? "closed" : "open"},
                      {"action", init == fin ? "unchanged" : (fin ? "close" : "open")}});
    }
    j["switching"] = std::move(sw);
    ojson lines = ojson::array();
    for (std::size_t l = 0; l < g.num_lines(); ++l) {
        const std::size_t nl = g.num_lines();
        lines.push_back({{"line", g.lines[l].id},
                         {"p", fs.f_p[l]},
                         {"q", fs.f_q[l]},
                         {"failure_bound", cfg.gamma[l] + cfg.beta[l] * std::abs(fs.f_p[l])},
                         {"psi_upper", r.solution.psi[l]},
                         {"psi_lower", r.solution.psi[nl + l]},
                         {"chi", r.solution.chi[l]}});
    }
    j["lines"] = std::move(lines);
    j["worst_case"] = {{"scenario", scenario_bits(r.worst_case.scenario)},
                       {"failed_lines", failed_ids(g, r.worst_case.scenario)},
                       {"recourse_cost", r.worst_case.recourse_cost},
                       {"subproblem_value", r.worst_case.objective}};
    return j;
}

Switching switching_from_solution(const GridInstance& g, const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open solution file " + path.string());
    ojson doc;
    try {
        doc = ojson::parse(in);
    } catch (const ojson::parse_error& e) {
        throw ConfigError(std::string("solution file is not valid JSON: ") + e.what());
    }
    if (!doc.contains("switching")) throw ConfigError("solution file has no \"switching\" array");
    Switching z(g.num_lines(), -1);
    for (const auto& s : doc["switching"]) {
        const int id = s.at("line").get<int>();
        const auto it = std::find_if(g.lines.begin(), g.lines.end(), [&](const Line& l) { return l.id == id; });
        if (it == g.lines.end()) throw ConfigError("solution refers to unknown line " + std::to_string(id));
        z[static_cast<std::size_t>(it - g.lines.begin())] = s.at("final").get<std::string>() == "closed" ? 1 : 0;
    }
    if (std::count(z.begin(), z.end(), -1) != 0) throw ConfigError("solution does not cover every line");
    return z;
}

int cmd_solve(const RunConfig& rc, std::ostream& out) {
    const GridInstance g = load_instance(rc.instance_path);
    const DduConfig cfg = load_ddu_config(rc.ddu_path, g);
    const Provenance prov{instance_signature(g), config_hash(cfg, g)};
    std::vector<OptimalityCut> warm;
    if (!rc.warm_start_path.empty()) warm = load_cuts(g, rc.warm_start_path);
    DdroOptions opt;
    opt.threads = rc.threads;
    opt.on_iteration = [&](const IterationLog& e) {
        out << "iter " << e.iteration << "  lb " << e.lb << "  ub " << e.best_ub << "  gap " << e.gap << '\n';
    };
    const DdroResult r = solve_ddro(g, cfg, warm, opt);
    fs::create_directories(rc.out_dir);
    write_file(fs::path(rc.out_dir) / "solution.json", solution_json(g, cfg, r, prov).dump(2) + "\n");
    write_file(fs::path(rc.out_dir) / "iterations.csv", prov.csv_comment() + iteration_log_csv(r.log));
    save_cuts(g, r.cuts, fs::path(rc.out_dir) / "cuts.json", hex64(*prov.cfg_hash));
    out << "objective " << r.upper_bound << "  switching actions " << count_actions(r.solution.first_stage)
        << (r.converged ? "" : "  (iteration cap reached)") << '\n';
    if (!r.converged) throw ToleranceError("iteration cap reached with gap " + std::to_string(r.gap));
    return 0;
}

int cmd_oracle(const RunConfig& rc, std::ostream& out) {
    const GridInstance g = load_instance(rc.instance_path);
    const DduConfig cfg = load_ddu_config(rc.ddu_path, g);
    const Provenance prov{instance_signature(g), config_hash(cfg, g)};
    const std::size_t support = support_size(g.num_lines(), cfg.k_budget);
    if (support > cfg.support_cap)
        throw SupportCapError("support has " + std::to_string(support) + " scenarios, above the cap of " +
                              std::to_string(cfg.support_cap) + "; refusing to enumerate");
    std::vector<OptimalityCut> warm;
    if (!rc.warm_start_path.empty()) warm = load_cuts(g, rc.warm_start_path);
    DdroOptions opt;
    opt.threads = rc.threads;
    const DdroResult r = solve_ddro(g, cfg, warm, opt);
    const auto& fs = r.solution.first_stage;
    const OracleResult o = worst_case_expectation_oracle(g, cfg, fs.z_sw, fs.f_p, rc.threads);
    const double reference = fs.total_cost() + o.value;
    const double diff = r.upper_bound - reference;
    const double tol = cfg.epsilon * std::max(std::abs(reference), 1.0);
    const double h_all = evaluate_recourse(g, fs.z_sw, all_available(g)).cost;

    ojson j;
    j["provenance"] = prov.json();
    j["k_budget"] = cfg.k_budget;
    j["support_size"] = support;
    j["decomposition_value"] = r.upper_bound;
    j["first_stage_cost"] = fs.total_cost();
    j["oracle_worst_case_expectation"] = o.value;
    j["oracle_value"] = reference;
    j["difference"] = diff;
    j["tolerance"] = tol;
    j["within_tolerance"] = std::abs(diff) <= tol;
    j["recourse_all_available"] = h_all;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    fs::create_directories(rc.out_dir);
    write_file(fs::path(rc.out_dir) / "oracle.json", j.dump(2) + "\n");
    out << "decomposition " << r.upper_bound << "  oracle " << reference << "  difference " << diff << '\n';
    if (std::abs(diff) > tol) throw ToleranceError("decomposition and oracle differ by " + std::to_string(diff));
    return 0;
}

int cmd_simulate(const RunConfig& rc, std::ostream& out) {
    const GridInstance g = load_instance(rc.instance_path);
    const DduConfig cfg = load_ddu_config(rc.ddu_path, g);
    const Provenance prov{instance_signature(g), config_hash(cfg, g)};
    Switching z;
    if (!rc.solution_path.empty()) {
        z = switching_from_solution(g, rc.solution_path);
    } else if (!rc.switching_bits.empty()) {
        z = scenario_from_bits(rc.switching_bits);
        if (z.size() != g.num_lines()) throw ConfigError("--switching must have one digit per line");
    } else {
        throw ConfigError("simulate needs --solution or --switching");
    }
    const OutOfSampleReport r = simulate(g, cfg, z, rc.samples, rc.seed, rc.threads);

    ojson j;
    j["provenance"] = prov.json();
    j["sampler"] = kSamplerName;
    j["seed"] = rc.seed;
    j["samples"] = r.samples;
    j["switching"] = scenario_bits(normalize_switching(g, z));
    j["mean_loss_pct"] = r.mean_pct;
    j["cvar95_loss_pct"] = r.cvar95_pct;
    j["mean_cost"] = r.mean_cost;
    double reactive = 0.0;
    for (double v : r.reactive_loss_pct) reactive += v;
    j["mean_reactive_loss_pct"] = reactive / static_cast<double>(r.samples);
    j["distinct_patterns"] = r.distinct_patterns;
    ojson probs = ojson::array();
    for (std::size_t l = 0; l < g.num_lines(); ++l)
        probs.push_back({{"line", g.lines[l].id},
                         {"probability", r.probabilities[l]},
                         {"observed_failures", r.failure_counts[l]}});
    j["probabilities"] = std::move(probs);
    fs::create_directories(rc.out_dir);
    write_file(fs::path(rc.out_dir) / "summary.json", j.dump(2) + "\n");
    write_file(fs::path(rc.out_dir) / "scenarios.csv", prov.csv_comment() + scenarios_csv(r));
    write_file(fs::path(rc.out_dir) / "inverse_cdf.csv", prov.csv_comment() + inverse_cdf_csv(r));
    out << "mean loss " << r.mean_pct << "%  CVaR95 " << r.cvar95_pct << "%  over " << r.samples << " scenarios\n";
    return 0;
}

int cmd_rules(const RunConfig& rc, std::ostream& out) {
    const GridInstance g = load_instance(rc.instance_path);
    Provenance prov{instance_signature(g), std::nullopt};
    if (!rc.ddu_path.empty()) prov.cfg_hash = config_hash(load_ddu_config(rc.ddu_path, g), g);
    const auto rules = generate_radiality_rules(g);
    auto as_ids = [&](const std::vector<ForbiddenPattern>& ps) {
        ojson a = ojson::array();
        for (const auto& p : ps) {
            std::vector<int> ids;
            for (std::size_t l : p) ids.push_back(g.lines[l].id);
            a.push_back(ids);
        }
        return a;
    };
    auto sorted = [](std::vector<ForbiddenPattern> ps) {
        for (auto& p : ps) std::sort(p.begin(), p.end());
        std::sort(ps.begin(), ps.end());
        return ps;
    };
    ojson j;
    j["provenance"] = prov.json();
    j["generated"] = as_ids(rules);
    j["instance_rules"] = as_ids(g.forbidden_patterns);
    j["instance_rules_match"] = sorted(rules) == sorted(g.forbidden_patterns);
    fs::create_directories(rc.out_dir);
    write_file(fs::path(rc.out_dir) / "rules.json", j.dump(2) + "\n");
    out << rules.size() << " forbidden switching patterns\n";
    return 0;
}

void report(std::ostream& err, const char* kind, const std::string& message) {
    err << ojson{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig rc;
    CLI::App app{"Wildfire-aware distribution grid switching"};
    app.require_subcommand(1);
    auto add_common = [&](CLI::App* sub, bool needs_ddu) {
        sub->add_option("--instance", rc.instance_path, "grid instance JSON")->required()->check(CLI::ExistingFile);
        auto* ddu = sub->add_option("--ddu", rc.ddu_path, "ambiguity configuration JSON")->check(CLI::ExistingFile);
        if (needs_ddu) ddu->required();
        sub->add_option("--out", rc.out_dir, "output directory")->required();
        sub->add_option("--threads", rc.threads, "worker threads")->check(CLI::PositiveNumber);
    };
    auto* solve = app.add_subcommand("solve", "run the cutting-plane solver");
    add_common(solve, true);
    solve->add_option("--warm-start", rc.warm_start_path, "cut cache to seed the master")->check(CLI::ExistingFile);
    auto* oracle = app.add_subcommand("oracle", "compare the solver against support enumeration");
    add_common(oracle, true);
    oracle->add_option("--warm-start", rc.warm_start_path, "cut cache to seed the master")->check(CLI::ExistingFile);
    auto* sim = app.add_subcommand("simulate", "out-of-sample Monte Carlo evaluation");
    add_common(sim, true);
    sim->add_option("--solution", rc.solution_path, "solution.json from a solve run")->check(CLI::ExistingFile);
    sim->add_option("--switching", rc.switching_bits, "one 0/1 digit per line");
    sim->add_option("--seed", rc.seed, "sampler seed (default 1)");
    sim->add_option("--samples", rc.samples, "scenario count (default 2000)")->check(CLI::PositiveNumber);
    auto* rules = app.add_subcommand("rules", "list the forbidden switching patterns");
    add_common(rules, false);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        report(err, "usage", e.what());
        return 2;
    }

    try {
        if (*solve) return cmd_solve(rc, out);
        if (*oracle) return cmd_oracle(rc, out);
        if (*sim) return cmd_simulate(rc, out);
        return cmd_rules(rc, out);
    } catch (const SignatureError& e) {
        report(err, "signature", e.what());
        return 4;
    } catch (const SupportCapError& e) {
        report(err, "support_cap", e.what());
        return 7;
    } catch (const CalibrationError& e) {
        report(err, "calibration", e.what());
        return 6;
    } catch (const ToleranceError& e) {
        report(err, "tolerance", e.what());
        return 8;
    } catch (const ConfigError& e) {
        report(err, "config", e.what());
        return 2;
    } catch (const InstanceError& e) {
        report(err, "instance", e.what());
        return 2;
    } catch (const PreconditionError& e) {
        report(err, "precondition", e.what());
        return 3;
    } catch (const milp::SolverError& e) {
        report(err, "solver", e.what());
        return 5;
    } catch (const std::exception& e) {
        report(err, "internal", e.what());
        return 1;
    }
}

}  // namespace gridfire
