#include "gridfire/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace gridfire {

namespace {

struct Draw {
    std::mt19937_64 gen;
    explicit Draw(std::uint64_t seed) : gen(seed) {}
    // Portable: avoid distribution objects whose output differs across standard libraries.
    double uniform() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }
    std::size_t range(std::size_t lo, std::size_t hi) { return lo + index(hi - lo + 1); }
    bool coin(double p) { return uniform() < p; }
};

}  // namespace

GridInstance random_radial_instance(std::uint64_t seed, const SyntheticOptions& opt) {
    Draw d(seed);
    GridInstance g;
    g.base_mva = 10.0;
    g.loss_cost = 1000.0;

    const std::size_t max_n = std::min(opt.max_buses, opt.max_lines + 1);
    const std::size_t n = d.range(opt.min_buses, std::max(opt.min_buses, max_n));
    const std::size_t subs = (opt.allow_two_substations && n >= 5 && d.coin(0.35)) ? 2 : 1;
    for (std::size_t i = 0; i < n; ++i) {
        Bus b;
        b.id = static_cast<int>(i + 1);
        b.is_substation = i < subs;
        b.demand_p = b.is_substation ? 0.0 : opt.step * static_cast<double>(d.range(2, 15));
        b.power_factor = std::round(d.uniform(0.9, 1.0) * 100.0) / 100.0;
        b.v_min = 0.9;
        b.v_max = 1.1;
        g.buses.push_back(b);
    }
    for (std::size_t i = 0; i < subs; ++i) {
        Substation s;
        s.bus = static_cast<int>(i + 1);
        s.p_max = 2.0;
        s.q_min = -1.0;
        s.q_max = 1.0;
        s.energy_cost = std::round(d.uniform(10.0, 50.0));
        s.v_ref = 1.0;
        g.substations.push_back(s);
    }

    auto make_line = [&](std::size_t from, std::size_t to, bool switchable, bool closed) {
        Line l;
        l.id = static_cast<int>(g.lines.size() + 1);
        l.from_bus = static_cast<int>(from + 1);
        l.to_bus = static_cast<int>(to + 1);
        l.r = std::round(d.uniform(0.005, 0.05) * 1000.0) / 1000.0;
        l.x = std::round(d.uniform(0.005, 0.05) * 1000.0) / 1000.0;
        l.f_max = opt.step * static_cast<double>(d.range(20, 60));
        l.switchable = switchable;
        l.initial_closed = closed;
        l.switch_cost = switchable ? std::round(d.uniform(1.0, 20.0)) : 0.0;
        g.lines.push_back(l);
    };

    std::set<std::pair<std::size_t, std::size_t>> used;
    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t j = d.index(i);
        make_line(j, i, d.coin(0.3), true);
        used.insert({j, i});
    }
    const std::size_t room = std::min(opt.max_extra_switches, opt.max_lines - (n - 1));
    const std::size_t extra = room == 0 ? 0 : d.range(0, room);
    for (std::size_t k = 0, attempts = 0; k < extra && attempts < 50; ++attempts) {
        std::size_t a = d.index(n), b = d.index(n);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        if (used.count({a, b})) continue;
        used.insert({a, b});
        make_line(a, b, true, false);
        ++k;
    }
    g.forbidden_patterns = generate_radiality_rules(g);
    g.validate();
    return g;
}

DduConfig random_ddu_config(const GridInstance& g, std::uint64_t seed, std::size_t k, double step) {
    Draw d(seed ^ 0x9e3779b97f4a7c15ULL);
    DduConfig c = default_config(g, k);
    c.expansion_step = step;
    for (std::size_t l = 0; l < g.num_lines(); ++l) {
        c.gamma[l] = std::round(d.uniform(0.001, 0.05) * 1e4) / 1e4;
        c.beta[l] = d.coin(0.5) ? 0.0 : std::round(d.uniform(0.5, 3.0) * 100.0) / 100.0;
        int digits = 1;
        while (step * (std::ldexp(1.0, digits) - 1.0) < g.lines[l].f_max) ++digits;
        c.expansion_digits[l] = digits;
    }
    c.validate(g);
    return c;
}

GridInstance wildfire_bypass_instance() {
    GridInstance g;
    g.base_mva = 10.0;
    g.loss_cost = 1000.0;
    const double demand[6] = {0.0, 0.05, 0.05, 0.0, 0.10, 0.10};
    for (int i = 0; i < 6; ++i) {
        Bus b;
        b.id = i + 1;
        b.demand_p = demand[i];
        b.power_factor = demand[i] > 0.0 ? 0.95 : 1.0;
        b.is_substation = (i == 0 || i == 3);
        g.buses.push_back(b);
    }
    for (auto [bus, cost] : {std::pair{1, 10.0}, std::pair{4, 60.0}}) {
        Substation s;
        s.bus = bus;
        s.p_max = 1.0;
        s.q_min = -1.0;
        s.q_max = 1.0;
        s.energy_cost = cost;
        g.substations.push_back(s);
    }
    struct Spec {
        int from, to;
        bool switchable, closed;
    };
    const Spec specs[] = {{1, 2, false, true}, {2, 3, false, true}, {2, 5, false, true},
                          {5, 6, false, true}, {4, 6, true, false}};
    for (const auto& s : specs) {
        Line l;
        l.id = static_cast<int>(g.lines.size() + 1);
        l.from_bus = s.from;
        l.to_bus = s.to;
        l.r = 0.01;
        l.x = 0.01;
        l.f_max = 0.5;
        l.switchable = s.switchable;
        l.initial_closed = s.closed;
        l.switch_cost = s.switchable ? 5.0 : 0.0;
        g.lines.push_back(l);
    }
    g.forbidden_patterns = {};
    g.validate();
    return g;
}

}  // namespace gridfire
