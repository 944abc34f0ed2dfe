#pragma once

#include <cstdint>

#include "gridfire/ambiguity.hpp"
#include "gridfire/grid_model.hpp"

namespace gridfire {

/// Bounds for randomly generated radial test feeders. Demands are integer
/// multiples of `step` so that radial flows land on the expansion grid.
struct SyntheticOptions {
    std::size_t min_buses = 4;
    std::size_t max_buses = 10;
    std::size_t max_lines = 12;
    std::size_t max_extra_switches = 3;
    bool allow_two_substations = true;
    double step = 0.01;
};

/// A radial feeder: a random spanning tree (some tree lines switchable and
/// closed) plus a few open switchable ties. Forbidden patterns come from
/// generate_radiality_rules.
GridInstance random_radial_instance(std::uint64_t seed, const SyntheticOptions& opt = {});

/// gamma in [0.001, 0.05]; beta zero on roughly half the lines and in
/// [0.5, 3] elsewhere; s = opt.step with the fewest digits spanning f_max.
DduConfig random_ddu_config(const GridInstance& g, std::uint64_t seed, std::size_t k, double step = 0.01);

/// Six-bus feeder with a fire-exposed corridor line (2-5) and an open
/// switchable bypass (4-6) fed by an expensive second substation.
GridInstance wildfire_bypass_instance();

}  // namespace gridfire
