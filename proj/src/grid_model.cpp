#include "gridfire/grid_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

namespace gridfire {

using nlohmann::json;

double Bus::tan_phi() const { return std::tan(std::acos(power_factor)); }

double Bus::demand_q() const { return tan_phi() * demand_p; }

std::size_t GridInstance::bus_index(int bus_id) const {
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == bus_id) return i;
    throw InstanceError("unknown bus " + std::to_string(bus_id));
}

std::size_t GridInstance::line_index(int line_id) const {
    for (std::size_t i = 0; i < lines.size(); ++i)
        if (lines[i].id == line_id) return i;
    throw InstanceError("unknown line " + std::to_string(line_id));
}

std::optional<std::size_t> GridInstance::substation_at(std::size_t bus_index) const {
    const int id = buses[bus_index].id;
    for (std::size_t k = 0; k < substations.size(); ++k)
        if (substations[k].bus == id) return k;
    return std::nullopt;
}

std::vector<std::size_t> GridInstance::switchable_lines() const {
    std::vector<std::size_t> out;
    for (std::size_t l = 0; l < lines.size(); ++l)
        if (lines[l].switchable) out.push_back(l);
    return out;
}

double GridInstance::total_demand_p() const {
    double total = 0.0;
    for (const auto& b : buses) total += b.demand_p;
    return total;
}

namespace {

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    // Returns false when a and b were already connected.
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[b] = a;
        return true;
    }
};

std::string bus_label(const Bus& b) { return "bus " + std::to_string(b.id); }
std::string line_label(const Line& l) { return "line " + std::to_string(l.id); }

}  // namespace

void GridInstance::validate() const {
    if (!(base_mva > 0.0)) throw InstanceError("base_mva must be positive");
    if (loss_cost < 0.0) throw InstanceError("loss_cost must be nonnegative");
    if (substations.empty()) throw InstanceError("instance has no substation");

    std::set<int> bus_ids;
    for (const auto& b : buses) {
        if (!bus_ids.insert(b.id).second) throw InstanceError(bus_label(b) + ": duplicate id");
        if (!(b.v_min > 0.0) || b.v_min > b.v_max)
            throw InstanceError(bus_label(b) + ": require 0 < v_min <= v_max");
        if (b.demand_p < 0.0) throw InstanceError(bus_label(b) + ": negative demand_p");
        if (!(b.power_factor > 0.0) || b.power_factor > 1.0)
            throw InstanceError(bus_label(b) + ": power_factor must lie in (0, 1]");
    }

    std::set<int> sub_buses;
    for (const auto& s : substations) {
        const std::string label = "substation at bus " + std::to_string(s.bus);
        if (!bus_ids.count(s.bus)) throw InstanceError(label + ": dangling bus reference");
        if (!sub_buses.insert(s.bus).second) throw InstanceError(label + ": duplicate substation");
        const Bus& b = buses[bus_index(s.bus)];
        if (!b.is_substation) throw InstanceError(label + ": bus is not flagged is_substation");
        if (s.p_max < 0.0) throw InstanceError(label + ": negative p_max");
        if (s.q_min > s.q_max) throw InstanceError(label + ": q_min > q_max");
        if (s.post_p_max() < 0.0 || s.post_q_min() > s.post_q_max())
            throw InstanceError(label + ": invalid post-contingency limits");
        if (s.v_ref < b.v_min || s.v_ref > b.v_max)
            throw InstanceError(label + ": v_ref outside the bus voltage bounds");
        if (s.energy_cost < 0.0) throw InstanceError(label + ": negative energy_cost");
    }
    for (const auto& b : buses)
        if (b.is_substation && !sub_buses.count(b.id))
            throw InstanceError(bus_label(b) + ": flagged is_substation but has no substation entry");

    std::set<int> line_ids;
    for (const auto& l : lines) {
        if (!line_ids.insert(l.id).second) throw InstanceError(line_label(l) + ": duplicate id");
        if (!bus_ids.count(l.from_bus))
            throw InstanceError(line_label(l) + ": dangling reference to bus " + std::to_string(l.from_bus));
        if (!bus_ids.count(l.to_bus))
            throw InstanceError(line_label(l) + ": dangling reference to bus " + std::to_string(l.to_bus));
        if (l.from_bus == l.to_bus) throw InstanceError(line_label(l) + ": from_bus == to_bus");
        if (!(l.f_max > 0.0)) throw InstanceError(line_label(l) + ": f_max must be positive");
        if (l.r < 0.0) throw InstanceError(line_label(l) + ": negative resistance");
        if (l.switch_cost < 0.0) throw InstanceError(line_label(l) + ": negative switch_cost");
    }

    for (const auto& pattern : forbidden_patterns) {
        if (pattern.empty()) throw InstanceError("empty forbidden pattern");
        for (std::size_t l : pattern) {
            if (l >= lines.size()) throw InstanceError("forbidden pattern references an unknown line");
            if (!lines[l].switchable)
                throw InstanceError(line_label(lines[l]) + ": forbidden pattern contains a non-switchable line");
        }
    }

    UnionFind uf(buses.size());
    for (std::size_t l = 0; l < lines.size(); ++l) {
        if (lines[l].switchable) continue;
        if (!uf.unite(from_index(l), to_index(l)))
            throw UnrepairableCycleError(line_label(lines[l]) +
                                         ": non-switchable lines form a cycle");
    }
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string InstanceSignature::hash_hex() const {
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << topology_hash;
    return os.str();
}

InstanceSignature instance_signature(const GridInstance& g) {
    std::ostringstream os;
    for (const auto& b : g.buses) os << 'b' << b.id << (b.is_substation ? 's' : 'n') << ';';
    for (const auto& l : g.lines)
        os << 'l' << l.id << ':' << l.from_bus << '-' << l.to_bus << (l.switchable ? 'w' : 'f') << ';';
    return {g.num_buses(), g.num_lines(), fnv1a64(os.str())};
}

namespace {

template <typename T>
T required(const json& j, const char* key, const std::string& entity) {
    auto it = j.find(key);
    if (it == j.end()) throw InstanceError(entity + ": missing field '" + key + "'");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw InstanceError(entity + ": field '" + key + "' has the wrong type");
    }
}

template <typename T>
T optional_field(const json& j, const char* key, T fallback, const std::string& entity) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw InstanceError(entity + ": field '" + key + "' has the wrong type");
    }
}

}  // namespace

GridInstance parse_instance(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InstanceError(std::string("schema: malformed document: ") + e.what());
    }
    if (!doc.is_object()) throw InstanceError("schema: top level must be an object");
    for (const char* key : {"buses", "lines", "substations"})
        if (!doc.contains(key) || !doc[key].is_array())
            throw InstanceError(std::string("schema: missing array '") + key + "'");

    GridInstance g;
    g.base_mva = optional_field<double>(doc, "base_mva", 1.0, "instance");
    g.loss_cost = required<double>(doc, "loss_cost", "instance");

    for (const auto& jb : doc["buses"]) {
        Bus b;
        b.id = required<int>(jb, "id", "bus");
        const std::string label = "bus " + std::to_string(b.id);
        b.demand_p = optional_field<double>(jb, "demand_p", 0.0, label);
        b.power_factor = optional_field<double>(jb, "power_factor", 1.0, label);
        b.v_min = required<double>(jb, "v_min", label);
        b.v_max = required<double>(jb, "v_max", label);
        b.is_substation = optional_field<bool>(jb, "is_substation", false, label);
        g.buses.push_back(b);
    }
    for (const auto& jl : doc["lines"]) {
        Line l;
        l.id = required<int>(jl, "id", "line");
        const std::string label = "line " + std::to_string(l.id);
        l.from_bus = required<int>(jl, "from_bus", label);
        l.to_bus = required<int>(jl, "to_bus", label);
        l.r = required<double>(jl, "r", label);
        l.x = required<double>(jl, "x", label);
        l.f_max = required<double>(jl, "f_max", label);
        l.switchable = optional_field<bool>(jl, "switchable", false, label);
        l.initial_closed = optional_field<bool>(jl, "initial_closed", true, label);
        l.switch_cost = optional_field<double>(jl, "switch_cost", 0.0, label);
        g.lines.push_back(l);
    }
    for (const auto& js : doc["substations"]) {
        Substation s;
        s.bus = required<int>(js, "bus", "substation");
        const std::string label = "substation at bus " + std::to_string(s.bus);
        s.p_max = required<double>(js, "p_max", label);
        s.q_min = required<double>(js, "q_min", label);
        s.q_max = required<double>(js, "q_max", label);
        s.energy_cost = required<double>(js, "energy_cost", label);
        s.v_ref = required<double>(js, "v_ref", label);
        if (js.contains("p_max_post")) s.p_max_post = required<double>(js, "p_max_post", label);
        if (js.contains("q_min_post")) s.q_min_post = required<double>(js, "q_min_post", label);
        if (js.contains("q_max_post")) s.q_max_post = required<double>(js, "q_max_post", label);
        g.substations.push_back(s);
    }

    const bool has_patterns = doc.contains("forbidden_patterns") && !doc["forbidden_patterns"].is_null();
    if (has_patterns) {
        if (!doc["forbidden_patterns"].is_array())
            throw InstanceError("schema: forbidden_patterns must be an array");
        for (const auto& jp : doc["forbidden_patterns"]) {
            if (!jp.is_array()) throw InstanceError("schema: each forbidden pattern must be an array of line ids");
            ForbiddenPattern pattern;
            for (const auto& id : jp) {
                const int line_id = id.get<int>();
                auto it = std::find_if(g.lines.begin(), g.lines.end(),
                                       [&](const Line& l) { return l.id == line_id; });
                if (it == g.lines.end())
                    throw InstanceError("forbidden pattern: dangling reference to line " + std::to_string(line_id));
                pattern.push_back(static_cast<std::size_t>(it - g.lines.begin()));
            }
            std::sort(pattern.begin(), pattern.end());
            g.forbidden_patterns.push_back(std::move(pattern));
        }
    }

    g.validate();
    if (!has_patterns) g.forbidden_patterns = generate_radiality_rules(g);
    return g;
}

GridInstance load_instance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InstanceError("cannot open instance file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_instance(buffer.str());
}

std::string instance_to_json(const GridInstance& g, int indent) {
    json doc;
    doc["base_mva"] = g.base_mva;
    doc["loss_cost"] = g.loss_cost;
    doc["buses"] = json::array();
    for (const auto& b : g.buses)
        doc["buses"].push_back({{"id", b.id},
                                {"demand_p", b.demand_p},
                                {"power_factor", b.power_factor},
                                {"v_min", b.v_min},
                                {"v_max", b.v_max},
                                {"is_substation", b.is_substation}});
    doc["lines"] = json::array();
    for (const auto& l : g.lines)
        doc["lines"].push_back({{"id", l.id},
                                {"from_bus", l.from_bus},
                                {"to_bus", l.to_bus},
                                {"r", l.r},
                                {"x", l.x},
                                {"f_max", l.f_max},
                                {"switchable", l.switchable},
                                {"initial_closed", l.initial_closed},
                                {"switch_cost", l.switch_cost}});
    doc["substations"] = json::array();
    for (const auto& s : g.substations) {
        json js = {{"bus", s.bus},
                   {"p_max", s.p_max},
                   {"q_min", s.q_min},
                   {"q_max", s.q_max},
                   {"energy_cost", s.energy_cost},
                   {"v_ref", s.v_ref}};
        if (s.p_max_post) js["p_max_post"] = *s.p_max_post;
        if (s.q_min_post) js["q_min_post"] = *s.q_min_post;
        if (s.q_max_post) js["q_max_post"] = *s.q_max_post;
        doc["substations"].push_back(js);
    }
    doc["forbidden_patterns"] = json::array();
    for (const auto& pattern : g.forbidden_patterns) {
        json jp = json::array();
        for (std::size_t l : pattern) jp.push_back(g.lines[l].id);
        doc["forbidden_patterns"].push_back(jp);
    }
    return doc.dump(indent);
}

void save_instance(const GridInstance& g, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InstanceError("cannot write instance file " + path.string());
    out << instance_to_json(g) << '\n';
}

bool has_cycle(const GridInstance& g, const std::vector<bool>& closed) {
    UnionFind uf(g.num_buses());
    for (std::size_t l = 0; l < g.num_lines(); ++l) {
        const bool in_service = !g.lines[l].switchable || closed.at(l);
        if (in_service && !uf.unite(g.from_index(l), g.to_index(l))) return true;
    }
    return false;
}

namespace {

// Simple-cycle enumeration on the multigraph whose vertices are the
// components of the fixed network and whose edges are switchable lines.
class CycleEnumerator {
public:
    CycleEnumerator(std::size_t num_vertices, std::vector<std::pair<std::size_t, std::size_t>> edges,
                    std::vector<std::size_t> edge_lines)
        : adjacency_(num_vertices), edges_(std::move(edges)), edge_lines_(std::move(edge_lines)) {
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            const auto [u, v] = edges_[e];
            if (u == v) continue;
            adjacency_[u].push_back(e);
            adjacency_[v].push_back(e);
        }
    }

    std::set<std::vector<std::size_t>> run() {
        for (std::size_t e = 0; e < edges_.size(); ++e)
            if (edges_[e].first == edges_[e].second) found_.insert({edge_lines_[e]});
        on_path_.assign(adjacency_.size(), false);
        used_.assign(edges_.size(), false);
        for (std::size_t s = 0; s < adjacency_.size(); ++s) {
            start_ = s;
            on_path_[s] = true;
            dfs(s);
            on_path_[s] = false;
        }
        return std::move(found_);
    }

private:
    void dfs(std::size_t u) {
        for (std::size_t e : adjacency_[u]) {
            if (used_[e]) continue;
            const auto [a, b] = edges_[e];
            const std::size_t v = (a == u) ? b : a;
            if (v == start_) {
                if (path_.empty()) continue;
                std::vector<std::size_t> cycle = path_;
                cycle.push_back(e);
                for (auto& c : cycle) c = edge_lines_[c];
                std::sort(cycle.begin(), cycle.end());
                found_.insert(std::move(cycle));
            } else if (v > start_ && !on_path_[v]) {
                used_[e] = true;
                on_path_[v] = true;
                path_.push_back(e);
                dfs(v);
                path_.pop_back();
                on_path_[v] = false;
                used_[e] = false;
            }
        }
    }

    std::vector<std::vector<std::size_t>> adjacency_;
    std::vector<std::pair<std::size_t, std::size_t>> edges_;
    std::vector<std::size_t> edge_lines_;
    std::vector<bool> on_path_;
    std::vector<bool> used_;
    std::vector<std::size_t> path_;
    std::size_t start_ = 0;
    std::set<std::vector<std::size_t>> found_;
};

}  // namespace

std::vector<ForbiddenPattern> generate_radiality_rules(const GridInstance& g) {
    UnionFind uf(g.num_buses());
    for (std::size_t l = 0; l < g.num_lines(); ++l) {
        if (g.lines[l].switchable) continue;
        if (!uf.unite(g.from_index(l), g.to_index(l)))
            throw UnrepairableCycleError("line " + std::to_string(g.lines[l].id) +
                                         ": non-switchable lines form a cycle");
    }

    // Contract every fixed-network tree to a single vertex.
    std::map<std::size_t, std::size_t> component;
    for (std::size_t b = 0; b < g.num_buses(); ++b) component.emplace(uf.find(b), component.size());

    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::vector<std::size_t> edge_lines;
    for (std::size_t l : g.switchable_lines()) {
        edges.emplace_back(component.at(uf.find(g.from_index(l))), component.at(uf.find(g.to_index(l))));
        edge_lines.push_back(l);
    }

    auto cycles = CycleEnumerator(component.size(), std::move(edges), std::move(edge_lines)).run();

    // Keep only minimal sets; a superset is implied by any of its subsets.
    std::vector<ForbiddenPattern> sorted(cycles.begin(), cycles.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.size() < b.size(); });
    std::vector<ForbiddenPattern> minimal;
    for (const auto& candidate : sorted) {
        const bool implied = std::any_of(minimal.begin(), minimal.end(), [&](const ForbiddenPattern& kept) {
            return std::includes(candidate.begin(), candidate.end(), kept.begin(), kept.end());
        });
        if (!implied) minimal.push_back(candidate);
    }
    std::sort(minimal.begin(), minimal.end());
    return minimal;
}

double annual_rate_to_horizon_probability(double rate_per_year, double horizon_hours) {
    if (!(rate_per_year >= 0.0)) throw std::invalid_argument("failure rate must be nonnegative");
    if (!(horizon_hours > 0.0)) throw std::invalid_argument("horizon must be positive");
    return -std::expm1(-rate_per_year * horizon_hours / 8760.0);
}

}  // namespace gridfire
