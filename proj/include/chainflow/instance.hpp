#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "chainflow/core.hpp"

namespace chainflow {

enum class EntityKind { Supplier, Oem, Distributor, Customer };

inline const char* to_string(EntityKind k) {
    switch (k) {
        case EntityKind::Supplier: return "supplier";
        case EntityKind::Oem: return "oem";
        case EntityKind::Distributor: return "distributor";
        case EntityKind::Customer: return "customer";
    }
    return "?";
}

inline std::optional<EntityKind> entity_kind_from_string(const std::string& s) {
    if (s == "supplier") return EntityKind::Supplier;
    if (s == "oem") return EntityKind::Oem;
    if (s == "distributor") return EntityKind::Distributor;
    if (s == "customer") return EntityKind::Customer;
    return std::nullopt;
}

struct Product {
    std::string id;
    std::string name;
};

// component is consumed at conversion_rate units per unit of successor produced.
struct BomRule {
    std::string component;
    std::string successor;
    double conversion_rate = 1.0;
};

using ProductMap = std::map<std::string, double>;

struct Entity {
    std::string id;
    EntityKind kind = EntityKind::Supplier;
    double production_capacity = 0.0;  // mixed-product units
    double open_cost = 0.0;            // fixed cost of opening a production line
    ProductMap production_cost;        // per unit produced
    ProductMap holding_cost;           // per unit held at period end
    ProductMap initial_inventory;      // units on hand at period start
    ProductMap demand;                 // stored nonnegative (see README on sign convention)
    ProductMap shortage_penalty;       // per unit of unmet demand
    ProductMap due_time;               // absent key = no deadline
};

struct Edge {
    std::string from;
    std::string to;
    double capacity = 0.0;    // mixed-flow units across all products
    double fixed_cost = 0.0;  // charged once per product routed on the edge
    ProductMap unit_cost;
    ProductMap lead_time;  // required for every product the edge carries
    ProductMap fixed_late_penalty;
    ProductMap unit_late_penalty;
};

// Lead-time (and optionally capacity) shock applied to one entity's outbound edges.
struct Disruption {
    std::string entity;
    double lead_time_multiplier = 1.0;  // >= 1
    double capacity_multiplier = 1.0;   // in [0, 1]
};

inline double map_get(const ProductMap& m, const std::string& key, double fallback = 0.0) {
    auto it = m.find(key);
    return it == m.end() ? fallback : it->second;
}

struct SupplyChainInstance {
    std::string name;
    std::vector<Product> products;
    std::vector<BomRule> bom;
    std::vector<Entity> entities;
    std::vector<Edge> edges;

    // ---- derived lookups, rebuilt by finalize() ----
    std::map<std::string, int> product_index;
    std::map<std::string, int> entity_index;
    std::vector<std::vector<int>> out_edges;       // entity -> edge indices
    std::vector<std::vector<int>> in_edges;        // entity -> edge indices
    std::vector<std::vector<int>> edge_products;   // edge -> carried product indices (sorted)
    std::vector<std::vector<std::pair<int, double>>> bom_components;  // successor -> (component, rate)
    std::vector<std::vector<std::pair<int, double>>> bom_consumers;   // component -> (successor, rate)
    // requirements[(j,k)]: products whose arrival entity j must await before
    // dispatching product k. Derived from kind + BOM; empty for suppliers.
    std::map<std::pair<int, int>, std::vector<int>> requirements;
    std::vector<int> topo_order;  // entity indices, sources first; empty if cyclic
    bool entity_graph_is_dag = false;

    const Product& product(int k) const { return products[static_cast<size_t>(k)]; }
    const Entity& entity(int i) const { return entities[static_cast<size_t>(i)]; }
    const Edge& edge(int e) const { return edges[static_cast<size_t>(e)]; }

    int find_product(const std::string& id) const {
        auto it = product_index.find(id);
        return it == product_index.end() ? -1 : it->second;
    }
    int find_entity(const std::string& id) const {
        auto it = entity_index.find(id);
        return it == entity_index.end() ? -1 : it->second;
    }

    std::optional<double> due_time(int entity_idx, int product_idx) const {
        const auto& m = entities[static_cast<size_t>(entity_idx)].due_time;
        auto it = m.find(products[static_cast<size_t>(product_idx)].id);
        if (it == m.end()) return std::nullopt;
        return it->second;
    }

    bool edge_carries(int e, int k) const {
        const auto& eps = edge_products[static_cast<size_t>(e)];
        return std::binary_search(eps.begin(), eps.end(), k);
    }

    // Products entity i can produce: the keys of its production_cost map.
    std::vector<int> producible(int i) const {
        std::vector<int> out;
        for (const auto& [pid, cost] : entities[static_cast<size_t>(i)].production_cost) {
            (void)cost;
            int k = find_product(pid);
            if (k >= 0) out.push_back(k);
        }
        return out;
    }

    // Products entity i dispatches (carried on at least one outbound edge).
    std::vector<int> dispatchable(int i) const {
        std::set<int> s;
        for (int e : out_edges[static_cast<size_t>(i)])
            for (int k : edge_products[static_cast<size_t>(e)]) s.insert(k);
        return {s.begin(), s.end()};
    }

    void finalize();
};

inline void SupplyChainInstance::finalize() {
    product_index.clear();
    entity_index.clear();
    for (size_t k = 0; k < products.size(); ++k) product_index.emplace(products[k].id, static_cast<int>(k));
    for (size_t i = 0; i < entities.size(); ++i) entity_index.emplace(entities[i].id, static_cast<int>(i));

    const size_t nv = entities.size();
    out_edges.assign(nv, {});
    in_edges.assign(nv, {});
    edge_products.assign(edges.size(), {});
    for (size_t e = 0; e < edges.size(); ++e) {
        int from = find_entity(edges[e].from);
        int to = find_entity(edges[e].to);
        if (from >= 0) out_edges[static_cast<size_t>(from)].push_back(static_cast<int>(e));
        if (to >= 0) in_edges[static_cast<size_t>(to)].push_back(static_cast<int>(e));
        std::set<int> carried;
        for (const auto& [pid, l] : edges[e].lead_time) {
            (void)l;
            int k = find_product(pid);
            if (k >= 0) carried.insert(k);
        }
        edge_products[e].assign(carried.begin(), carried.end());
    }

    bom_components.assign(products.size(), {});
    bom_consumers.assign(products.size(), {});
    for (const auto& rule : bom) {
        int comp = find_product(rule.component);
        int succ = find_product(rule.successor);
        if (comp < 0 || succ < 0) continue;
        bom_components[static_cast<size_t>(succ)].emplace_back(comp, rule.conversion_rate);
        bom_consumers[static_cast<size_t>(comp)].emplace_back(succ, rule.conversion_rate);
    }

    // Kahn's algorithm over the entity graph; a leftover means a cycle.
    topo_order.clear();
    std::vector<int> indeg(nv, 0);
    for (size_t i = 0; i < nv; ++i) indeg[i] = static_cast<int>(in_edges[i].size());
    std::vector<int> queue;
    for (size_t i = 0; i < nv; ++i)
        if (indeg[i] == 0) queue.push_back(static_cast<int>(i));
    for (size_t head = 0; head < queue.size(); ++head) {
        int i = queue[head];
        topo_order.push_back(i);
        for (int e : out_edges[static_cast<size_t>(i)]) {
            int to = find_entity(edges[static_cast<size_t>(e)].to);
            if (to >= 0 && --indeg[static_cast<size_t>(to)] == 0) queue.push_back(to);
        }
    }
    entity_graph_is_dag = topo_order.size() == nv;
    if (!entity_graph_is_dag) topo_order.clear();

    requirements.clear();
    for (size_t j = 0; j < nv; ++j) {
        const Entity& ent = entities[j];
        if (ent.kind == EntityKind::Supplier) continue;
        for (int k : dispatchable(static_cast<int>(j))) {
            std::vector<int> req;
            if (ent.kind == EntityKind::Distributor) {
                req.push_back(k);
            } else if (ent.kind == EntityKind::Oem) {
                for (const auto& [comp, rate] : bom_components[static_cast<size_t>(k)]) {
                    (void)rate;
                    req.push_back(comp);
                }
                std::sort(req.begin(), req.end());
                req.erase(std::unique(req.begin(), req.end()), req.end());
            }
            requirements[{static_cast<int>(j), k}] = std::move(req);
        }
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

inline std::vector<Violation> validate(const SupplyChainInstance& inst) {
    std::vector<Violation> out;
    auto add = [&](std::string code, std::string subject, std::string message) {
        out.push_back({std::move(code), std::move(subject), std::move(message), 0.0});
    };

    std::set<std::string> product_ids;
    for (const auto& p : inst.products)
        if (!product_ids.insert(p.id).second)
            add("duplicate-product-id", p.id, "product id declared more than once");
    std::set<std::string> entity_ids;
    for (const auto& ent : inst.entities)
        if (!entity_ids.insert(ent.id).second)
            add("duplicate-entity-id", ent.id, "entity id declared more than once");

    auto check_products_known = [&](const ProductMap& m, const std::string& owner, const char* field) {
        for (const auto& [pid, v] : m) {
            (void)v;
            if (!product_ids.count(pid))
                add("product-unknown", owner + "," + pid, std::string(field) + " references undeclared product");
        }
    };

    for (const auto& rule : inst.bom) {
        if (!product_ids.count(rule.component))
            add("product-unknown", rule.component, "bom component not declared");
        if (!product_ids.count(rule.successor))
            add("product-unknown", rule.successor, "bom successor not declared");
        if (!(rule.conversion_rate > 0.0))
            add("bom-nonpositive-rate", rule.component + "," + rule.successor,
                "conversion_rate must be > 0");
    }

    // BOM acyclicity over component -> successor arcs.
    {
        std::map<std::string, std::vector<std::string>> succs;
        std::map<std::string, int> indeg;
        for (const auto& rule : inst.bom) {
            succs[rule.component].push_back(rule.successor);
            indeg.emplace(rule.component, 0);
            indeg.emplace(rule.successor, 0);
        }
        for (const auto& rule : inst.bom) ++indeg[rule.successor];
        std::vector<std::string> queue;
        for (const auto& [k, d] : indeg)
            if (d == 0) queue.push_back(k);
        size_t seen = 0;
        for (size_t head = 0; head < queue.size(); ++head) {
            ++seen;
            for (const auto& s : succs[queue[head]])
                if (--indeg[s] == 0) queue.push_back(s);
        }
        if (seen != indeg.size()) add("bom-cycle", "", "bill of materials contains a cycle");
    }

    std::set<std::pair<std::string, std::string>> edge_pairs;
    for (const auto& e : inst.edges) {
        const std::string subject = e.from + "->" + e.to;
        if (!entity_ids.count(e.from)) add("edge-unknown-entity", e.from, "edge source not declared");
        if (!entity_ids.count(e.to)) add("edge-unknown-entity", e.to, "edge target not declared");
        if (e.from == e.to) add("edge-self-loop", subject, "edge endpoints must differ");
        if (!edge_pairs.insert({e.from, e.to}).second)
            add("edge-duplicate", subject, "duplicate (from,to) pair");
        if (e.capacity < 0.0) add("edge-negative-capacity", subject, "capacity must be >= 0");
        check_products_known(e.unit_cost, subject, "unit_cost");
        check_products_known(e.lead_time, subject, "lead_time");
        check_products_known(e.fixed_late_penalty, subject, "fixed_late_penalty");
        check_products_known(e.unit_late_penalty, subject, "unit_late_penalty");
        // Every product with any cost/penalty entry must carry a lead time.
        auto needs_lead = [&](const ProductMap& m) {
            for (const auto& [pid, v] : m) {
                (void)v;
                if (!e.lead_time.count(pid))
                    add("missing-lead-time", subject + "," + pid,
                        "edge-product pair carries a cost entry but no lead_time");
            }
        };
        needs_lead(e.unit_cost);
        needs_lead(e.fixed_late_penalty);
        needs_lead(e.unit_late_penalty);
        for (const auto& [pid, l] : e.lead_time)
            if (l < 0.0) add("negative-lead-time", subject + "," + pid, "lead_time must be >= 0");
    }

    for (const auto& ent : inst.entities) {
        check_products_known(ent.production_cost, ent.id, "production_cost");
        check_products_known(ent.holding_cost, ent.id, "holding_cost");
        check_products_known(ent.initial_inventory, ent.id, "initial_inventory");
        check_products_known(ent.demand, ent.id, "demand");
        check_products_known(ent.shortage_penalty, ent.id, "shortage_penalty");
        check_products_known(ent.due_time, ent.id, "due_time");
        if (ent.production_capacity < 0.0)
            add("negative-production-capacity", ent.id, "production_capacity must be >= 0");
        for (const auto& [pid, v] : ent.demand)
            if (v < 0.0) add("negative-demand", ent.id + "," + pid, "demand stored nonnegative");
        for (const auto& [pid, v] : ent.initial_inventory)
            if (v < 0.0) add("negative-inventory", ent.id + "," + pid, "initial_inventory must be >= 0");
        for (const auto& [pid, v] : ent.due_time)
            if (v < 0.0) add("negative-due-time", ent.id + "," + pid, "due_time must be >= 0");
    }

    // Kind rules need resolved indices; skip when references are already broken.
    if (out.empty()) {
        for (size_t i = 0; i < inst.entities.size(); ++i) {
            const Entity& ent = inst.entities[i];
            const bool has_in = !inst.in_edges[i].empty();
            const bool has_out = !inst.out_edges[i].empty();
            switch (ent.kind) {
                case EntityKind::Supplier:
                    if (has_in) add("supplier-has-upstream", ent.id, "suppliers admit no inbound edges");
                    if (!ent.demand.empty())
                        add("supplier-has-demand", ent.id, "demand only at consuming entities");
                    break;
                case EntityKind::Customer:
                    if (has_out) add("customer-has-outbound", ent.id, "customers admit no outbound edges");
                    if (ent.production_capacity != 0.0)
                        add("customer-has-capacity", ent.id, "customer production_capacity must be 0");
                    break;
                default:
                    break;
            }
        }
        if (!inst.entity_graph_is_dag) add("graph-not-dag", "", "entity graph contains a cycle");
    }

    return out;
}

// ---------------------------------------------------------------------------
// Transforms (pure; inputs are never mutated)
// ---------------------------------------------------------------------------

inline SupplyChainInstance apply_disruption(const SupplyChainInstance& inst, const Disruption& d) {
    if (!(d.lead_time_multiplier >= 1.0))
        throw ChainflowError("disruption lead_time_multiplier must be >= 1, got " +
                             fmt_num(d.lead_time_multiplier));
    if (!(d.capacity_multiplier >= 0.0 && d.capacity_multiplier <= 1.0))
        throw ChainflowError("disruption capacity_multiplier must lie in [0,1], got " +
                             fmt_num(d.capacity_multiplier));
    int idx = inst.find_entity(d.entity);
    if (idx < 0) throw ChainflowError("disruption references unknown entity '" + d.entity + "'");

    SupplyChainInstance out = inst;
    for (int e : inst.out_edges[static_cast<size_t>(idx)]) {
        Edge& edge = out.edges[static_cast<size_t>(e)];
        for (auto& [pid, l] : edge.lead_time) {
            (void)pid;
            l *= d.lead_time_multiplier;
        }
        edge.capacity *= d.capacity_multiplier;
    }
    out.finalize();
    return out;
}

enum class TopologyVariant { Tree, ReverseTree, Chain };

inline const char* to_string(TopologyVariant v) {
    switch (v) {
        case TopologyVariant::Tree: return "tree";
        case TopologyVariant::ReverseTree: return "reverse_tree";
        case TopologyVariant::Chain: return "chain";
    }
    return "?";
}

inline std::optional<TopologyVariant> topology_variant_from_string(const std::string& s) {
    if (s == "tree") return TopologyVariant::Tree;
    if (s == "reverse_tree") return TopologyVariant::ReverseTree;
    if (s == "chain") return TopologyVariant::Chain;
    return std::nullopt;
}

struct VariantEdits {
    std::vector<std::string> remove_entities;
    std::vector<std::pair<std::string, std::string>> remove_edges;
    std::vector<Entity> add_entities;
    std::vector<Edge> add_edges;
    std::map<std::string, double> set_production_capacity;
    std::vector<std::tuple<std::string, std::string, double>> set_edge_capacity;

    bool empty() const {
        return remove_entities.empty() && remove_edges.empty() && add_entities.empty() &&
               add_edges.empty() && set_production_capacity.empty() && set_edge_capacity.empty();
    }
};

namespace detail {

inline std::map<EntityKind, double> production_by_kind(const SupplyChainInstance& inst) {
    std::map<EntityKind, double> m;
    for (const auto& ent : inst.entities) m[ent.kind] += ent.production_capacity;
    return m;
}

inline std::map<std::string, double> demand_by_product(const SupplyChainInstance& inst) {
    std::map<std::string, double> m;
    for (const auto& ent : inst.entities)
        for (const auto& [pid, d] : ent.demand) m[pid] += d;
    return m;
}

inline double total_edge_capacity(const SupplyChainInstance& inst) {
    double q = 0.0;
    for (const auto& e : inst.edges) q += e.capacity;
    return q;
}

}  // namespace detail

// Applies structural edits for a named topology variant and enforces the
// conservation contract: per-tier production capacity, per-product demand and
// total edge capacity must match the input within 1e-9.
inline SupplyChainInstance topology_variant(const SupplyChainInstance& inst, TopologyVariant variant,
                                            const VariantEdits& edits) {
    if (variant == TopologyVariant::Tree && edits.empty()) return inst;

    SupplyChainInstance out = inst;
    out.name = inst.name.empty() ? std::string(to_string(variant))
                                 : inst.name + "_" + to_string(variant);

    std::set<std::string> removed(edits.remove_entities.begin(), edits.remove_entities.end());
    for (const auto& id : edits.remove_entities)
        if (inst.find_entity(id) < 0)
            throw ChainflowError("variant edit removes unknown entity '" + id + "'");

    std::erase_if(out.entities, [&](const Entity& ent) { return removed.count(ent.id) > 0; });
    std::erase_if(out.edges, [&](const Edge& e) {
        if (removed.count(e.from) || removed.count(e.to)) return true;
        for (const auto& [from, to] : edits.remove_edges)
            if (e.from == from && e.to == to) return true;
        return false;
    });
    for (const auto& ent : edits.add_entities) out.entities.push_back(ent);
    for (const auto& e : edits.add_edges) out.edges.push_back(e);
    for (const auto& [id, cap] : edits.set_production_capacity) {
        bool found = false;
        for (auto& ent : out.entities)
            if (ent.id == id) {
                ent.production_capacity = cap;
                found = true;
            }
        if (!found) throw ChainflowError("variant edit sets capacity of unknown entity '" + id + "'");
    }
    for (const auto& [from, to, cap] : edits.set_edge_capacity) {
        bool found = false;
        for (auto& e : out.edges)
            if (e.from == from && e.to == to) {
                e.capacity = cap;
                found = true;
            }
        if (!found)
            throw ChainflowError("variant edit sets capacity of unknown edge " + from + "->" + to);
    }
    out.finalize();

    const double tol = 1e-9;
    auto before_p = detail::production_by_kind(inst);
    auto after_p = detail::production_by_kind(out);
    for (const auto& [kind, cap] : before_p) {
        double got = after_p.count(kind) ? after_p[kind] : 0.0;
        if (std::fabs(got - cap) > tol)
            throw ChainflowError(std::string("capacity-conservation violation in tier ") +
                                 to_string(kind) + ": " + fmt_num(cap) + " -> " + fmt_num(got));
    }
    auto before_d = detail::demand_by_product(inst);
    auto after_d = detail::demand_by_product(out);
    if (before_d != after_d) throw ChainflowError("demand mismatch between variant and base instance");
    if (std::fabs(detail::total_edge_capacity(inst) - detail::total_edge_capacity(out)) > tol)
        throw ChainflowError("edge-capacity conservation violation between variant and base instance");
    if (!out.entity_graph_is_dag) throw ChainflowError("variant instance graph is not a DAG");
    return out;
}

// Longest path length in edges from the entity to any customer; customers are 0.
// The convention behind the "depth" column of study reports.
inline int entity_depth(const SupplyChainInstance& inst, int entity_idx) {
    std::vector<int> depth(inst.entities.size(), 0);
    for (auto it = inst.topo_order.rbegin(); it != inst.topo_order.rend(); ++it) {
        int i = *it;
        for (int e : inst.out_edges[static_cast<size_t>(i)]) {
            int to = inst.find_entity(inst.edges[static_cast<size_t>(e)].to);
            depth[static_cast<size_t>(i)] =
                std::max(depth[static_cast<size_t>(i)], depth[static_cast<size_t>(to)] + 1);
        }
    }
    return depth[static_cast<size_t>(entity_idx)];
}

}  // namespace chainflow
