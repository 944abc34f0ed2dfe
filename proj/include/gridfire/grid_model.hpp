#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gridfire {

/// Raised when an instance file or an in-memory instance violates the
/// documented schema or one of the model invariants. The message names the
/// offending entity (e.g. "line 12: ...").
class InstanceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by radiality-rule generation when the non-switchable network
/// already contains a cycle.
class UnrepairableCycleError : public InstanceError {
public:
    using InstanceError::InstanceError;
};

struct Bus {
    int id = 0;
    double demand_p = 0.0;      // per-unit
    double power_factor = 1.0;  // (0, 1]
    double v_min = 0.9;
    double v_max = 1.1;
    bool is_substation = false;

    /// Reactive demand tan(arccos(PF)) * D^p. Never stored.
    double demand_q() const;
    double tan_phi() const;
};

struct Substation {
    int bus = 0;
    double p_max = 0.0;
    double q_min = 0.0;
    double q_max = 0.0;
    double energy_cost = 0.0;
    double v_ref = 1.0;
    // Post-contingency injection limits. Default to the pre-contingency ones.
    std::optional<double> p_max_post;
    std::optional<double> q_min_post;
    std::optional<double> q_max_post;

    double post_p_max() const { return p_max_post.value_or(p_max); }
    double post_q_min() const { return q_min_post.value_or(q_min); }
    double post_q_max() const { return q_max_post.value_or(q_max); }
};

struct Line {
    int id = 0;
    int from_bus = 0;
    int to_bus = 0;
    double r = 0.0;
    double x = 0.0;
    double f_max = 1.0;
    bool switchable = false;
    bool initial_closed = true;
    double switch_cost = 0.0;
};

/// A set of switchable lines that may not all be closed at once. Stored as
/// internal line indices (positions in GridInstance::lines).
using ForbiddenPattern = std::vector<std::size_t>;

/// The full static input. Buses, lines and substations are addressed by
/// their position in the vectors ("index"); the `id` fields are the labels
/// used in files and reports.
struct GridInstance {
    double base_mva = 1.0;
    std::vector<Bus> buses;
    std::vector<Line> lines;
    std::vector<Substation> substations;
    std::vector<ForbiddenPattern> forbidden_patterns;
    double loss_cost = 0.0;

    std::size_t num_buses() const { return buses.size(); }
    std::size_t num_lines() const { return lines.size(); }

    std::size_t bus_index(int bus_id) const;
    std::size_t line_index(int line_id) const;
    std::optional<std::size_t> substation_at(std::size_t bus_index) const;
    std::size_t from_index(std::size_t line) const { return bus_index(lines[line].from_bus); }
    std::size_t to_index(std::size_t line) const { return bus_index(lines[line].to_bus); }

    /// Switchable line indices in ascending order.
    std::vector<std::size_t> switchable_lines() const;
    double total_demand_p() const;

    /// Throws InstanceError on the first violated invariant.
    void validate() const;
};

/// Identifies an instance topology so cut caches can refuse foreign data.
struct InstanceSignature {
    std::size_t num_buses = 0;
    std::size_t num_lines = 0;
    std::uint64_t topology_hash = 0;

    bool operator==(const InstanceSignature&) const = default;
    std::string hash_hex() const;
};

InstanceSignature instance_signature(const GridInstance& g);

/// FNV-1a over raw bytes; used for instance signatures and config hashes.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

GridInstance load_instance(const std::filesystem::path& path);
GridInstance parse_instance(const std::string& json_text);
std::string instance_to_json(const GridInstance& g, int indent = 2);
void save_instance(const GridInstance& g, const std::filesystem::path& path);

/// Enumerates the switchable-line sets of every cycle that closing switchable
/// lines can create on top of the fixed network. The result is minimal (no
/// set contains another) and sorted; any topology that keeps at least one
/// line of every set open is acyclic.
std::vector<ForbiddenPattern> generate_radiality_rules(const GridInstance& g);

/// True when the graph formed by the non-switchable lines plus the closed
/// switchable lines contains a cycle. `closed` is indexed by line.
bool has_cycle(const GridInstance& g, const std::vector<bool>& closed);

/// Exponential-lifetime conversion 1 - exp(-rate * hours / 8760).
double annual_rate_to_horizon_probability(double rate_per_year, double horizon_hours);

}  // namespace gridfire
