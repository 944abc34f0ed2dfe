#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "gridfire/cli.hpp"
#include "gridfire/driver.hpp"
#include "gridfire/montecarlo.hpp"
#include "gridfire/synthetic.hpp"

namespace py = pybind11;
using namespace gridfire;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Wildfire-aware distribution switching under decision-dependent ambiguity";

    py::register_exception<InstanceError>(m, "InstanceError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
    py::register_exception<SignatureError>(m, "SignatureError", PyExc_ValueError);
    py::register_exception<SupportCapError>(m, "SupportCapError", PyExc_RuntimeError);
    py::register_exception<CalibrationError>(m, "CalibrationError", PyExc_RuntimeError);
    py::register_exception<milp::SolverError>(m, "SolverError", PyExc_RuntimeError);

    py::class_<GridInstance>(m, "GridInstance")
        .def_static("load", &load_instance, py::arg("path"))
        .def_static("parse", &parse_instance, py::arg("json_text"))
        .def("to_json", &instance_to_json, py::arg("indent") = 2)
        .def_property_readonly("num_buses", &GridInstance::num_buses)
        .def_property_readonly("num_lines", &GridInstance::num_lines)
        .def_property_readonly("line_ids",
                               [](const GridInstance& g) {
                                   std::vector<int> ids;
                                   for (const auto& l : g.lines) ids.push_back(l.id);
                                   return ids;
                               })
        .def_property_readonly("total_demand_p", &GridInstance::total_demand_p)
        .def("initial_switching", [](const GridInstance& g) { return initial_switching(g); });

    py::class_<DduConfig>(m, "DduConfig")
        .def_static("load", &load_ddu_config, py::arg("path"), py::arg("instance"))
        .def_static("parse", &parse_ddu_config, py::arg("json_text"), py::arg("instance"))
        .def_static("default", &default_config, py::arg("instance"), py::arg("k_budget"))
        .def("to_json", [](const DduConfig& c, const GridInstance& g) { return ddu_config_to_json(c, g); })
        .def("hash", [](const DduConfig& c, const GridInstance& g) { return config_hash(c, g); })
        .def_readwrite("gamma", &DduConfig::gamma)
        .def_readwrite("beta", &DduConfig::beta)
        .def_readwrite("k_budget", &DduConfig::k_budget)
        .def_readwrite("epsilon", &DduConfig::epsilon)
        .def_readwrite("max_iterations", &DduConfig::max_iterations)
        .def_readwrite("expansion_step", &DduConfig::expansion_step)
        .def_readwrite("expansion_digits", &DduConfig::expansion_digits);

    py::class_<FirstStageSolution>(m, "FirstStageSolution")
        .def_readonly("z", &FirstStageSolution::z_sw)
        .def_readonly("y", &FirstStageSolution::y_sw)
        .def_readonly("f_p", &FirstStageSolution::f_p)
        .def_readonly("f_q", &FirstStageSolution::f_q)
        .def_readonly("cost_energy", &FirstStageSolution::cost_energy)
        .def_readonly("cost_shed", &FirstStageSolution::cost_shed)
        .def_readonly("cost_switch", &FirstStageSolution::cost_switch)
        .def_property_readonly("total_cost", &FirstStageSolution::total_cost);

    py::class_<IterationLog>(m, "IterationLog")
        .def_readonly("iteration", &IterationLog::iteration)
        .def_readonly("lb", &IterationLog::lb)
        .def_readonly("ub", &IterationLog::ub)
        .def_readonly("best_ub", &IterationLog::best_ub)
        .def_readonly("gap", &IterationLog::gap)
        .def_readonly("scenario", &IterationLog::scenario_added)
        .def_readonly("seconds", &IterationLog::seconds);

    py::class_<OptimalityCut>(m, "OptimalityCut")
        .def_readonly("id", &OptimalityCut::id)
        .def_readonly("scenario", &OptimalityCut::scenario);

    py::class_<DdroResult>(m, "DdroResult")
        .def_property_readonly("first_stage", [](const DdroResult& r) { return r.solution.first_stage; })
        .def_property_readonly("psi", [](const DdroResult& r) { return r.solution.psi; })
        .def_property_readonly("phi", [](const DdroResult& r) { return r.solution.phi; })
        .def_property_readonly("worst_scenario", [](const DdroResult& r) { return r.worst_case.scenario; })
        .def_readonly("log", &DdroResult::log)
        .def_readonly("cuts", &DdroResult::cuts)
        .def_readonly("warm_cut_count", &DdroResult::warm_cut_count)
        .def_readonly("iterations", &DdroResult::iterations)
        .def_readonly("converged", &DdroResult::converged)
        .def_readonly("lower_bound", &DdroResult::lower_bound)
        .def_readonly("upper_bound", &DdroResult::upper_bound)
        .def_readonly("gap", &DdroResult::gap)
        .def_property_readonly("objective", &DdroResult::objective);

    m.def(
        "solve_ddro",
        [](const GridInstance& g, const DduConfig& cfg, const std::vector<OptimalityCut>& warm, int threads) {
            py::gil_scoped_release release;
            DdroOptions opt;
            opt.threads = threads;
            return solve_ddro(g, cfg, warm, opt);
        },
        py::arg("instance"), py::arg("config"), py::arg("warm_cuts") = std::vector<OptimalityCut>{},
        py::arg("threads") = 1);
    m.def("cuts_to_json", [](const GridInstance& g, const std::vector<OptimalityCut>& c) { return cuts_to_json(g, c); });
    m.def("cuts_from_json", &cuts_from_json, py::arg("instance"), py::arg("text"));

    m.def(
        "worst_case_expectation",
        [](const GridInstance& g, const DduConfig& cfg, const Switching& z, const std::vector<double>& f_p) {
            py::gil_scoped_release release;
            return worst_case_expectation_oracle(g, cfg, z, f_p).value;
        },
        py::arg("instance"), py::arg("config"), py::arg("z"), py::arg("f_p"));
    m.def(
        "recourse_cost",
        [](const GridInstance& g, const Switching& z, const Scenario& a) { return evaluate_recourse(g, z, a).cost; },
        py::arg("instance"), py::arg("z"), py::arg("a"));

    py::class_<OutOfSampleReport>(m, "OutOfSampleReport")
        .def_readonly("probabilities", &OutOfSampleReport::probabilities)
        .def_readonly("samples", &OutOfSampleReport::samples)
        .def_readonly("loss_of_load_pct", &OutOfSampleReport::loss_of_load_pct)
        .def_readonly("cost", &OutOfSampleReport::cost)
        .def_readonly("failure_counts", &OutOfSampleReport::failure_counts)
        .def_readonly("mean_pct", &OutOfSampleReport::mean_pct)
        .def_readonly("cvar95_pct", &OutOfSampleReport::cvar95_pct)
        .def_readonly("mean_cost", &OutOfSampleReport::mean_cost)
        .def_readonly("inverse_cdf", &OutOfSampleReport::inverse_cdf);
    m.def(
        "simulate",
        [](const GridInstance& g, const DduConfig& cfg, const Switching& z, std::size_t n, std::uint64_t seed,
           int threads) {
            py::gil_scoped_release release;
            return simulate(g, cfg, z, n, seed, threads);
        },
        py::arg("instance"), py::arg("config"), py::arg("z"), py::arg("samples") = 2000, py::arg("seed") = 1,
        py::arg("threads") = 1);

    m.def("annual_rate_to_horizon_probability", &annual_rate_to_horizon_probability, py::arg("rate_per_year"),
          py::arg("horizon_hours"));
    m.def("random_radial_instance", [](std::uint64_t seed) { return random_radial_instance(seed); }, py::arg("seed"));
    m.def("random_ddu_config", &random_ddu_config, py::arg("instance"), py::arg("seed"), py::arg("k_budget"),
          py::arg("step") = 0.01);
    m.def("wildfire_bypass_instance", &wildfire_bypass_instance);

    // Returns (exit_code, stdout, stderr).
    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = run_cli(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
