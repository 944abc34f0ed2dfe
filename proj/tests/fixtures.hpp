#pragma once

#include <cmath>
#include <string>

#include "gridfire/grid_model.hpp"

namespace fixtures {

using gridfire::Bus;
using gridfire::GridInstance;
using gridfire::Line;
using gridfire::Substation;

inline Bus bus(int id, double demand, double pf = 1.0, bool sub = false) {
    Bus b;
    b.id = id;
    b.demand_p = demand;
    b.power_factor = pf;
    b.v_min = 0.9;
    b.v_max = 1.1;
    b.is_substation = sub;
    return b;
}

inline Line line(int id, int from, int to, double f_max, bool switchable = false, bool closed = true,
                 double switch_cost = 0.0, double r = 0.01, double x = 0.01) {
    Line l;
    l.id = id;
    l.from_bus = from;
    l.to_bus = to;
    l.r = r;
    l.x = x;
    l.f_max = f_max;
    l.switchable = switchable;
    l.initial_closed = closed;
    l.switch_cost = switch_cost;
    return l;
}

inline Substation substation(int bus_id, double energy_cost, double p_max = 5.0) {
    Substation s;
    s.bus = bus_id;
    s.p_max = p_max;
    s.q_min = -5.0;
    s.q_max = 5.0;
    s.energy_cost = energy_cost;
    s.v_ref = 1.0;
    return s;
}

/// Substation bus 1 feeding one load at bus 2; C^tr = 10, C^ll = 1000.
inline GridInstance two_bus(double demand = 1.0, double f_max = 2.0, double pf = 1.0) {
    GridInstance g;
    g.loss_cost = 1000.0;
    g.buses = {bus(1, 0.0, 1.0, true), bus(2, demand, pf)};
    g.substations = {substation(1, 10.0)};
    g.lines = {line(1, 1, 2, f_max)};
    return g;
}

/// Three buses joined by three switchable lines, substation at bus 1.
inline GridInstance triangle() {
    GridInstance g;
    g.loss_cost = 1000.0;
    g.buses = {bus(1, 0.0, 1.0, true), bus(2, 0.1), bus(3, 0.1)};
    g.substations = {substation(1, 10.0)};
    g.lines = {line(1, 1, 2, 1.0, true, true, 1.0), line(2, 2, 3, 1.0, true, true, 1.0),
               line(3, 1, 3, 1.0, true, false, 1.0)};
    return g;
}

inline bool close(double a, double b, double rel = 1e-6) {
    return std::abs(a - b) <= rel * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

inline std::string data_path(const std::string& name) { return std::string(GRIDFIRE_DATA_DIR) + "/" + name; }

}  // namespace fixtures
