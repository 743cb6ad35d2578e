#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "chainflow/instance.hpp"
#include "chainflow/mip.hpp"

namespace chainflow {

// Weighting of late-delivery penalties. "1:500" reads unit_weight 1,
// fixed_weight 500; mode none turns lateness accounting off entirely.
struct LatenessPolicy {
    enum class Mode { None, Penalized };
    Mode mode = Mode::None;
    double unit_weight = 0.0;
    double fixed_weight = 0.0;

    static LatenessPolicy none() { return {}; }
    static LatenessPolicy penalized(double unit_w, double fixed_w) {
        if (unit_w < 0.0 || fixed_w < 0.0)
            throw ChainflowError("lateness policy weights must be nonnegative");
        LatenessPolicy p;
        p.mode = Mode::Penalized;
        p.unit_weight = unit_w;
        p.fixed_weight = fixed_w;
        return p;
    }
    bool penalized() const { return mode == Mode::Penalized; }
};

inline std::string to_string(const LatenessPolicy& p) {
    if (!p.penalized()) return "none";
    return fmt_num(p.unit_weight) + ":" + fmt_num(p.fixed_weight);
}

inline LatenessPolicy lateness_policy_from_string(const std::string& s) {
    if (s == "none") return LatenessPolicy::none();
    const size_t colon = s.find(':');
    if (colon == std::string::npos)
        throw ChainflowError("policy must be 'none' or 'UNIT:FIXED', got '" + s + "'");
    char* end = nullptr;
    const double u = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + colon)
        throw ChainflowError("bad unit weight in policy '" + s + "'");
    const double f = std::strtod(s.c_str() + colon + 1, &end);
    if (*end != '\0') throw ChainflowError("bad fixed weight in policy '" + s + "'");
    return LatenessPolicy::penalized(u, f);
}

struct EdgeProduct {
    int edge = -1;
    int product = -1;
    bool operator==(const EdgeProduct&) const = default;
};

struct EntityProduct {
    int entity = -1;
    int product = -1;
    bool operator==(const EntityProduct&) const = default;
};

// Column layout of the flow model. Families occupy contiguous column ranges
// in a canonical order derived from entity/edge/product declaration order, so
// two builds of the same instance agree column by column.
struct VariableIndex {
    std::vector<EdgeProduct> edge_products;       // y, beta, a, z, w, v
    std::vector<EntityProduct> demand_pairs;      // x, delta
    std::vector<EntityProduct> producible_pairs;  // p
    std::vector<EntityProduct> presence_pairs;    // I (and balance rows)
    std::vector<EntityProduct> dispatch_pairs;    // o
    int num_entities = 0;                         // zeta, one per entity

    int y_base = 0, beta_base = 0, x_base = 0, p_base = 0, zeta_base = 0, inv_base = 0,
        delta_base = 0, a_base = 0, o_base = 0, z_base = 0, w_base = 0, v_base = 0;
    int num_columns = 0;

    std::map<std::pair<int, int>, int> ep_pos;        // (edge, product) -> position
    std::map<std::pair<int, int>, int> demand_pos;    // (entity, product) -> position
    std::map<std::pair<int, int>, int> produce_pos;
    std::map<std::pair<int, int>, int> presence_pos;
    std::map<std::pair<int, int>, int> dispatch_pos;

    int y(int ep) const { return y_base + ep; }
    int beta(int ep) const { return beta_base + ep; }
    int x(int dp) const { return x_base + dp; }
    int p(int pp) const { return p_base + pp; }
    int zeta(int entity) const { return zeta_base + entity; }
    int inv(int pr) const { return inv_base + pr; }
    int delta(int dp) const { return delta_base + dp; }
    int a(int ep) const { return a_base + ep; }
    int o(int dp) const { return o_base + dp; }
    int z(int ep) const { return z_base + ep; }
    int w(int ep) const { return w_base + ep; }
    int v(int ep) const { return v_base + ep; }

    int find_ep(int edge, int product) const {
        auto it = ep_pos.find({edge, product});
        return it == ep_pos.end() ? -1 : it->second;
    }
    int find_dispatch(int entity, int product) const {
        auto it = dispatch_pos.find({entity, product});
        return it == dispatch_pos.end() ? -1 : it->second;
    }
};

inline VariableIndex build_variable_index(const SupplyChainInstance& inst) {
    VariableIndex ix;
    ix.num_entities = static_cast<int>(inst.entities.size());

    for (size_t e = 0; e < inst.edges.size(); ++e)
        for (int k : inst.edge_products[e]) {
            ix.ep_pos[{static_cast<int>(e), k}] = static_cast<int>(ix.edge_products.size());
            ix.edge_products.push_back({static_cast<int>(e), k});
        }

    std::set<std::pair<int, int>> presence;
    for (int i = 0; i < ix.num_entities; ++i) {
        const Entity& ent = inst.entities[static_cast<size_t>(i)];
        for (const auto* m : {&ent.production_cost, &ent.holding_cost, &ent.initial_inventory,
                              &ent.demand, &ent.shortage_penalty, &ent.due_time})
            for (const auto& [pid, v] : *m) {
                (void)v;
                int k = inst.find_product(pid);
                if (k >= 0) presence.insert({i, k});
            }
        for (int e : inst.in_edges[static_cast<size_t>(i)])
            for (int k : inst.edge_products[static_cast<size_t>(e)]) presence.insert({i, k});
        for (int e : inst.out_edges[static_cast<size_t>(i)])
            for (int k : inst.edge_products[static_cast<size_t>(e)]) presence.insert({i, k});
    }
    for (const auto& [i, k] : presence) {
        ix.presence_pos[{i, k}] = static_cast<int>(ix.presence_pairs.size());
        ix.presence_pairs.push_back({i, k});
    }

    for (int i = 0; i < ix.num_entities; ++i) {
        const Entity& ent = inst.entities[static_cast<size_t>(i)];
        for (const auto& [pid, d] : ent.demand)
            if (d > 0.0) {
                int k = inst.find_product(pid);
                ix.demand_pos[{i, k}] = static_cast<int>(ix.demand_pairs.size());
                ix.demand_pairs.push_back({i, k});
            }
        for (int k : inst.producible(i)) {
            ix.produce_pos[{i, k}] = static_cast<int>(ix.producible_pairs.size());
            ix.producible_pairs.push_back({i, k});
        }
        for (int k : inst.dispatchable(i)) {
            ix.dispatch_pos[{i, k}] = static_cast<int>(ix.dispatch_pairs.size());
            ix.dispatch_pairs.push_back({i, k});
        }
    }

    int base = 0;
    const int nep = static_cast<int>(ix.edge_products.size());
    const int ndp = static_cast<int>(ix.demand_pairs.size());
    const int npp = static_cast<int>(ix.producible_pairs.size());
    const int npr = static_cast<int>(ix.presence_pairs.size());
    const int nop = static_cast<int>(ix.dispatch_pairs.size());
    ix.y_base = base; base += nep;
    ix.beta_base = base; base += nep;
    ix.x_base = base; base += ndp;
    ix.p_base = base; base += npp;
    ix.zeta_base = base; base += ix.num_entities;
    ix.inv_base = base; base += npr;
    ix.delta_base = base; base += ndp;
    ix.a_base = base; base += nep;
    ix.o_base = base; base += nop;
    ix.z_base = base; base += nep;
    ix.w_base = base; base += nep;
    ix.v_base = base; base += nep;
    ix.num_columns = base;
    return ix;
}

// Tight deactivation constants for the arrival and lateness rows.
struct BigMTable {
    std::vector<double> entity_slack;   // O_i: longest lead-time path from any source
    std::vector<double> arrival_upper;  // per edge-product: U^a = l + O_from
    std::vector<double> late_big_m;     // per edge-product: max(0, U^a - t) + 1; 0 when no deadline
};

inline BigMTable compute_big_m(const SupplyChainInstance& inst, const VariableIndex& ix) {
    if (!inst.entity_graph_is_dag)
        throw ChainflowError("compute_big_m: entity graph is not a DAG");
    BigMTable table;
    table.entity_slack.assign(inst.entities.size(), 0.0);
    for (int i : inst.topo_order) {
        double longest = 0.0;
        for (int e : inst.in_edges[static_cast<size_t>(i)]) {
            const Edge& edge = inst.edges[static_cast<size_t>(e)];
            const int from = inst.find_entity(edge.from);
            double lmax = 0.0;
            for (const auto& [pid, l] : edge.lead_time) {
                (void)pid;
                lmax = std::max(lmax, l);
            }
            longest = std::max(longest, table.entity_slack[static_cast<size_t>(from)] + lmax);
        }
        table.entity_slack[static_cast<size_t>(i)] = longest;
    }
    table.arrival_upper.resize(ix.edge_products.size());
    table.late_big_m.resize(ix.edge_products.size());
    for (size_t ep = 0; ep < ix.edge_products.size(); ++ep) {
        const auto& [e, k] = ix.edge_products[ep];
        const Edge& edge = inst.edges[static_cast<size_t>(e)];
        const int from = inst.find_entity(edge.from);
        const int to = inst.find_entity(edge.to);
        const double lead = map_get(edge.lead_time, inst.product(k).id);
        table.arrival_upper[ep] = lead + table.entity_slack[static_cast<size_t>(from)];
        const auto due = inst.due_time(to, k);
        table.late_big_m[ep] = due ? std::max(0.0, table.arrival_upper[ep] - *due) + 1.0 : 0.0;
    }
    return table;
}

inline BigMTable compute_big_m(const SupplyChainInstance& inst) {
    return compute_big_m(inst, build_variable_index(inst));
}

struct BuildResult {
    MixedIntegerProgram program;
    VariableIndex index;
    BigMTable big_m;
};

namespace detail {

inline std::string ep_name(const SupplyChainInstance& inst, const EdgeProduct& ep) {
    const Edge& e = inst.edges[static_cast<size_t>(ep.edge)];
    return e.from + "," + e.to + "," + inst.product(ep.product).id;
}

inline std::string ik_name(const SupplyChainInstance& inst, const EntityProduct& ik) {
    return inst.entities[static_cast<size_t>(ik.entity)].id + "," + inst.product(ik.product).id;
}

// True when the pair gets live lateness accounting: a deadline exists at the
// receiving entity and the policy actually penalizes lateness.
inline bool lateness_active(const SupplyChainInstance& inst, const LatenessPolicy& policy,
                            const EdgeProduct& ep) {
    if (!policy.penalized()) return false;
    const Edge& e = inst.edges[static_cast<size_t>(ep.edge)];
    return inst.due_time(inst.find_entity(e.to), ep.product).has_value();
}

}  // namespace detail

// Assembles the flow/lateness model: flow balance with demand satisfaction as
// an outflow, edge/production capacities, shortage accounting, the exact
// three-row linearization of a = (l + o) * beta, readiness propagation, the
// big-M lateness indicator and the penalty linearization via v = z * a.
inline BuildResult build_model(const SupplyChainInstance& inst, const LatenessPolicy& policy) {
    {
        const auto violations = validate(inst);
        if (!violations.empty())
            throw ChainflowError("build_model: instance invalid: " + violation_line(violations[0]));
    }
    BuildResult out;
    out.index = build_variable_index(inst);
    out.big_m = compute_big_m(inst, out.index);
    const VariableIndex& ix = out.index;
    const BigMTable& bm = out.big_m;
    MixedIntegerProgram& mp = out.program;
    mp.name = inst.name.empty() ? std::string("CHAINFLOW") : inst.name;

    const int nep = static_cast<int>(ix.edge_products.size());
    const int ndp = static_cast<int>(ix.demand_pairs.size());

    auto pid = [&](int k) { return inst.product(k).id; };
    auto due_of = [&](const EdgeProduct& ep) {
        const Edge& e = inst.edges[static_cast<size_t>(ep.edge)];
        return inst.due_time(inst.find_entity(e.to), ep.product);
    };

    // ---- columns, family by family, matching VariableIndex offsets ----
    for (int epi = 0; epi < nep; ++epi) {
        const auto& ep = ix.edge_products[static_cast<size_t>(epi)];
        const Edge& e = inst.edges[static_cast<size_t>(ep.edge)];
        mp.add_column("y(" + detail::ep_name(inst, ep) + ")", 0.0, e.capacity,
                      map_get(e.unit_cost, pid(ep.product)));
    }
    for (int epi = 0; epi < nep; ++epi) {
        const auto& ep = ix.edge_products[static_cast<size_t>(epi)];
        const Edge& e = inst.edges[static_cast<size_t>(ep.edge)];
        mp.add_column("beta(" + detail::ep_name(inst, ep) + ")", 0.0, 1.0, e.fixed_cost,
                      VarKind::Binary);
    }
    for (int dpi = 0; dpi < ndp; ++dpi) {
        const auto& ik = ix.demand_pairs[static_cast<size_t>(dpi)];
        const Entity& ent = inst.entities[static_cast<size_t>(ik.entity)];
        mp.add_column("x(" + detail::ik_name(inst, ik) + ")", 0.0,
                      map_get(ent.demand, pid(ik.product)), 0.0);
    }
    for (const auto& ik : ix.producible_pairs) {
        const Entity& ent = inst.entities[static_cast<size_t>(ik.entity)];
        mp.add_column("p(" + detail::ik_name(inst, ik) + ")", 0.0, ent.production_capacity,
                      map_get(ent.production_cost, pid(ik.product)));
    }
    for (int i = 0; i < ix.num_entities; ++i) {
        const Entity& ent = inst.entities[static_cast<size_t>(i)];
        const bool producer = !ent.production_cost.empty();
        mp.add_column("zeta(" + ent.id + ")", 0.0, producer ? 1.0 : 0.0, ent.open_cost,
                      producer ? VarKind::Binary : VarKind::Continuous);
    }
    for (const auto& ik : ix.presence_pairs) {
        const Entity& ent = inst.entities[static_cast<size_t>(ik.entity)];
        double inflow_cap = 0.0;
        for (int e : inst.in_edges[static_cast<size_t>(ik.entity)])
            if (inst.edge_carries(e, ik.product)) inflow_cap += inst.edge(e).capacity;
        const bool producible = ent.production_cost.count(pid(ik.product)) > 0;
        const double ub = map_get(ent.initial_inventory, pid(ik.product)) +
                          (producible ? ent.production_capacity : 0.0) + inflow_cap;
        mp.add_column("I(" + detail::ik_name(inst, ik) + ")", 0.0, ub,
                      map_get(ent.holding_cost, pid(ik.product)));
    }
    for (int dpi = 0; dpi < ndp; ++dpi) {
        const auto& ik = ix.demand_pairs[static_cast<size_t>(dpi)];
        const Entity& ent = inst.entities[static_cast<size_t>(ik.entity)];
        mp.add_column("delta(" + detail::ik_name(inst, ik) + ")", 0.0,
                      map_get(ent.demand, pid(ik.product)),
                      map_get(ent.shortage_penalty, pid(ik.product)));
    }
    for (int epi = 0; epi < nep; ++epi) {
        const auto& ep = ix.edge_products[static_cast<size_t>(epi)];
        mp.add_column("a(" + detail::ep_name(inst, ep) + ")", 0.0,
                      bm.arrival_upper[static_cast<size_t>(epi)], 0.0);
    }
    for (const auto& ik : ix.dispatch_pairs) {
        const bool supplier =
            inst.entities[static_cast<size_t>(ik.entity)].kind == EntityKind::Supplier;
        mp.add_column("o(" + detail::ik_name(inst, ik) + ")", 0.0,
                      supplier ? 0.0 : bm.entity_slack[static_cast<size_t>(ik.entity)], 0.0);
    }
    for (int epi = 0; epi < nep; ++epi) {
        const auto& ep = ix.edge_products[static_cast<size_t>(epi)];
        const bool active = detail::lateness_active(inst, policy, ep);
        mp.add_column("z(" + detail::ep_name(inst, ep) + ")", 0.0, active ? 1.0 : 0.0, 0.0,
                      active ? VarKind::Binary : VarKind::Continuous);
    }
    for (int epi = 0; epi < nep; ++epi) {
        const auto& ep = ix.edge_products[static_cast<size_t>(epi)];
        const Edge& e = inst.edges[static_cast<size_t>(ep.edge)];
        double ub = 0.0;
        if (detail::lateness_active(inst, policy, ep)) {
            const double over =
                std::max(0.0, bm.arrival_upper[static_cast<size_t>(epi)] - *due_of(ep));
            ub = policy.fixed_weight * map_get(e.fixed_late_penalty, pid(ep.product)) +
                 policy.unit_weight * map_get(e.unit_late_penalty, pid(ep.product)) * over;
        }
        mp.add_column("w(" + detail::ep_name(inst, ep) + ")", 0.0, ub, 1.0);
    }
    for (int epi = 0; epi < nep; ++epi) {
        const auto& ep = ix.edge_products[static_cast<size_t>(epi)];
        const bool active = detail::lateness_active(inst, policy, ep);
        mp.add_column("v(" + detail::ep_name(inst, ep) + ")", 0.0,
                      active ? bm.arrival_upper[static_cast<size_t>(epi)] : 0.0, 0.0);
    }

    // ---- rows ----
    // Flow balance: outflow - inflow + consumption - production + x + I = I0.
    for (size_t pri = 0; pri < ix.presence_pairs.size(); ++pri) {
        const auto& ik = ix.presence_pairs[pri];
        const Entity& ent = inst.entities[static_cast<size_t>(ik.entity)];
        std::vector<std::pair<int, double>> coeffs;
        for (int e : inst.out_edges[static_cast<size_t>(ik.entity)]) {
            const int ep = ix.find_ep(e, ik.product);
            if (ep >= 0) coeffs.emplace_back(ix.y(ep), 1.0);
        }
        for (int e : inst.in_edges[static_cast<size_t>(ik.entity)]) {
            const int ep = ix.find_ep(e, ik.product);
            if (ep >= 0) coeffs.emplace_back(ix.y(ep), -1.0);
        }
        for (const auto& [succ, rate] : inst.bom_consumers[static_cast<size_t>(ik.product)]) {
            auto it = ix.produce_pos.find({ik.entity, succ});
            if (it != ix.produce_pos.end()) coeffs.emplace_back(ix.p(it->second), rate);
        }
        {
            auto it = ix.produce_pos.find({ik.entity, ik.product});
            if (it != ix.produce_pos.end()) coeffs.emplace_back(ix.p(it->second), -1.0);
        }
        {
            auto it = ix.demand_pos.find({ik.entity, ik.product});
            if (it != ix.demand_pos.end()) coeffs.emplace_back(ix.x(it->second), 1.0);
        }
        coeffs.emplace_back(ix.inv(static_cast<int>(pri)), 1.0);
        mp.add_row("balance(" + detail::ik_name(inst, ik) + ")", std::move(coeffs), RowSense::EQ,
                   map_get(ent.initial_inventory, pid(ik.product)));
    }

    // Edge activation y <= q * beta.
    for (int epi = 0; epi < nep; ++epi) {
        const auto& ep = ix.edge_products[static_cast<size_t>(epi)];
        const Edge& e = inst.edges[static_cast<size_t>(ep.edge)];
        mp.add_row("cap_edge(" + detail::ep_name(inst, ep) + ")",
                   {{ix.y(epi), 1.0}, {ix.beta(epi), -e.capacity}}, RowSense::LE, 0.0);
    }
    // Mixed-flow capacity per edge.
    for (size_t e = 0; e < inst.edges.size(); ++e) {
        std::vector<std::pair<int, double>> coeffs;
        for (int k : inst.edge_products[e]) coeffs.emplace_back(ix.y(ix.find_ep(static_cast<int>(e), k)), 1.0);
        if (coeffs.empty()) continue;
        mp.add_row("cap_mixed(" + inst.edges[e].from + "," + inst.edges[e].to + ")",
                   std::move(coeffs), RowSense::LE, inst.edges[e].capacity);
    }
    // Production capacity per producer.
    for (int i = 0; i < ix.num_entities; ++i) {
        std::vector<std::pair<int, double>> coeffs;
        for (int k : inst.producible(i)) coeffs.emplace_back(ix.p(ix.produce_pos.at({i, k})), 1.0);
        if (coeffs.empty()) continue;
        coeffs.emplace_back(ix.zeta(i), -inst.entity(i).production_capacity);
        mp.add_row("cap_prod(" + inst.entity(i).id + ")", std::move(coeffs), RowSense::LE, 0.0);
    }
    // Shortage: delta + x >= D.
    for (int dpi = 0; dpi < ndp; ++dpi) {
        const auto& ik = ix.demand_pairs[static_cast<size_t>(dpi)];
        const Entity& ent = inst.entities[static_cast<size_t>(ik.entity)];
        mp.add_row("shortfall(" + detail::ik_name(inst, ik) + ")",
                   {{ix.delta(dpi), 1.0}, {ix.x(dpi), 1.0}}, RowSense::GE,
                   map_get(ent.demand, pid(ik.product)));
    }
    // Arrival linearization of a = (l + o) * beta.
    for (int epi = 0; epi < nep; ++epi) {
        const auto& ep = ix.edge_products[static_cast<size_t>(epi)];
        const Edge& e = inst.edges[static_cast<size_t>(ep.edge)];
        const double lead = map_get(e.lead_time, pid(ep.product));
        const double ua = bm.arrival_upper[static_cast<size_t>(epi)];
        const int from = inst.find_entity(e.from);
        const int oc = ix.o(ix.find_dispatch(from, ep.product));
        const std::string tag = detail::ep_name(inst, ep);
        mp.add_row("arr_ub(" + tag + ")", {{ix.a(epi), 1.0}, {ix.beta(epi), -ua}}, RowSense::LE, 0.0);
        mp.add_row("arr_le(" + tag + ")", {{ix.a(epi), 1.0}, {oc, -1.0}, {ix.beta(epi), -lead}},
                   RowSense::LE, 0.0);
        mp.add_row("arr_ge(" + tag + ")", {{ix.a(epi), 1.0}, {oc, -1.0}, {ix.beta(epi), -ua}},
                   RowSense::GE, lead - ua);
    }
    // Readiness: o_jk >= a for every required component arriving at j.
    for (const auto& [key, req] : inst.requirements) {
        const auto& [j, k] = key;
        const int oc = ix.o(ix.find_dispatch(j, k));
        for (int e : inst.in_edges[static_cast<size_t>(j)]) {
            for (int comp : req) {
                const int ep = ix.find_ep(e, comp);
                if (ep < 0) continue;
                mp.add_row("ready(" + inst.entity(j).id + "," + pid(k) + "," +
                               inst.edge(e).from + "," + pid(comp) + ")",
                           {{oc, 1.0}, {ix.a(ep), -1.0}}, RowSense::GE, 0.0);
            }
        }
    }
    // Lateness indicator and penalty linearization, only where active.
    for (int epi = 0; epi < nep; ++epi) {
        const auto& ep = ix.edge_products[static_cast<size_t>(epi)];
        if (!detail::lateness_active(inst, policy, ep)) continue;
        const Edge& e = inst.edges[static_cast<size_t>(ep.edge)];
        const double t = *due_of(ep);
        const double ua = bm.arrival_upper[static_cast<size_t>(epi)];
        const double mz = bm.late_big_m[static_cast<size_t>(epi)];
        const double cf = policy.fixed_weight * map_get(e.fixed_late_penalty, pid(ep.product));
        const double cu = policy.unit_weight * map_get(e.unit_late_penalty, pid(ep.product));
        const std::string tag = detail::ep_name(inst, ep);
        mp.add_row("late_ind(" + tag + ")", {{ix.a(epi), 1.0}, {ix.z(epi), -mz}}, RowSense::LE, t);
        mp.add_row("v_ub(" + tag + ")", {{ix.v(epi), 1.0}, {ix.z(epi), -ua}}, RowSense::LE, 0.0);
        mp.add_row("v_le(" + tag + ")", {{ix.v(epi), 1.0}, {ix.a(epi), -1.0}}, RowSense::LE, 0.0);
        mp.add_row("v_ge(" + tag + ")", {{ix.v(epi), 1.0}, {ix.a(epi), -1.0}, {ix.z(epi), -ua}},
                   RowSense::GE, -ua);
        // w = cf*z + cu*(v - t*z)  <=>  w - (cf - cu*t)*z - cu*v = 0
        mp.add_row("w_def(" + tag + ")",
                   {{ix.w(epi), 1.0}, {ix.z(epi), -(cf - cu * t)}, {ix.v(epi), -cu}}, RowSense::EQ,
                   0.0);
    }

    return out;
}

// ---------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------

struct FlowPlan {
    std::vector<double> flow;          // y per edge-product
    std::vector<double> edge_open;     // beta per edge-product, exact 0/1
    std::vector<double> satisfied;     // x per demand pair
    std::vector<double> production;    // p per producible pair
    std::vector<double> line_open;     // zeta per entity, exact 0/1
    std::vector<double> inventory;     // I per presence pair
    std::vector<double> shortage;      // delta per demand pair
    std::vector<double> arrival;       // a per edge-product
    std::vector<double> ready;         // o per dispatch pair
    std::vector<double> late_flag;     // z per edge-product, exact 0/1
    std::vector<double> late_penalty;  // w per edge-product
    std::vector<double> late_product;  // v per edge-product

    std::vector<int> used_edges;  // edge-product positions with beta == 1

    void derive_used_edges() {
        used_edges.clear();
        for (size_t ep = 0; ep < edge_open.size(); ++ep)
            if (edge_open[ep] > 0.5) used_edges.push_back(static_cast<int>(ep));
    }
};

inline FlowPlan extract_solution(const MixedIntegerProgram& program, const VariableIndex& ix,
                                 std::span<const double> assignment,
                                 double integrality_tol = 1e-6) {
    if (static_cast<int>(assignment.size()) != program.num_columns())
        throw ChainflowError("extract_solution: assignment has " +
                             std::to_string(assignment.size()) + " values for " +
                             std::to_string(program.num_columns()) + " columns");
    auto rounded_binary = [&](int col) {
        const double v = assignment[static_cast<size_t>(col)];
        const double r = std::round(v);
        if (std::fabs(v - r) > integrality_tol)
            throw ChainflowError("extract_solution: column " +
                                 program.columns[static_cast<size_t>(col)].name +
                                 " is not integral: " + fmt_num(v));
        return r;
    };

    FlowPlan plan;
    const int nep = static_cast<int>(ix.edge_products.size());
    const int ndp = static_cast<int>(ix.demand_pairs.size());
    for (int i = 0; i < nep; ++i) plan.flow.push_back(assignment[static_cast<size_t>(ix.y(i))]);
    for (int i = 0; i < nep; ++i) plan.edge_open.push_back(rounded_binary(ix.beta(i)));
    for (int i = 0; i < ndp; ++i) plan.satisfied.push_back(assignment[static_cast<size_t>(ix.x(i))]);
    for (size_t i = 0; i < ix.producible_pairs.size(); ++i)
        plan.production.push_back(assignment[static_cast<size_t>(ix.p(static_cast<int>(i)))]);
    for (int i = 0; i < ix.num_entities; ++i) plan.line_open.push_back(rounded_binary(ix.zeta(i)));
    for (size_t i = 0; i < ix.presence_pairs.size(); ++i)
        plan.inventory.push_back(assignment[static_cast<size_t>(ix.inv(static_cast<int>(i)))]);
    for (int i = 0; i < ndp; ++i) plan.shortage.push_back(assignment[static_cast<size_t>(ix.delta(i))]);
    for (int i = 0; i < nep; ++i) plan.arrival.push_back(assignment[static_cast<size_t>(ix.a(i))]);
    for (size_t i = 0; i < ix.dispatch_pairs.size(); ++i)
        plan.ready.push_back(assignment[static_cast<size_t>(ix.o(static_cast<int>(i)))]);
    for (int i = 0; i < nep; ++i) plan.late_flag.push_back(rounded_binary(ix.z(i)));
    for (int i = 0; i < nep; ++i) plan.late_penalty.push_back(assignment[static_cast<size_t>(ix.w(i))]);
    for (int i = 0; i < nep; ++i) plan.late_product.push_back(assignment[static_cast<size_t>(ix.v(i))]);
    plan.derive_used_edges();
    return plan;
}

// Recomputes the time-side variables (o, a, z, v, w) from the used-edge set
// by the earliest-start recursion the constraints encode. LP vertices may
// park slack time variables anywhere between their bounds; this pins them to
// the canonical earliest times without touching flows or the objective at an
// optimum.
inline FlowPlan canonicalize_times(const SupplyChainInstance& inst, const LatenessPolicy& policy,
                                   const VariableIndex& ix, FlowPlan plan) {
    std::vector<char> used(ix.edge_products.size(), 0);
    for (int ep : plan.used_edges) used[static_cast<size_t>(ep)] = 1;

    std::fill(plan.ready.begin(), plan.ready.end(), 0.0);
    std::fill(plan.arrival.begin(), plan.arrival.end(), 0.0);
    for (int j : inst.topo_order) {
        // readiness first: max over required arrivals on used inbound edges
        for (int k : inst.dispatchable(j)) {
            const int dp = ix.find_dispatch(j, k);
            auto req_it = inst.requirements.find({j, k});
            if (req_it == inst.requirements.end()) continue;
            double ready = 0.0;
            for (int e : inst.in_edges[static_cast<size_t>(j)])
                for (int comp : req_it->second) {
                    const int ep = ix.find_ep(e, comp);
                    if (ep >= 0 && used[static_cast<size_t>(ep)])
                        ready = std::max(ready, plan.arrival[static_cast<size_t>(ep)]);
                }
            plan.ready[static_cast<size_t>(dp)] = ready;
        }
        // then arrivals on used outbound edges
        for (int e : inst.out_edges[static_cast<size_t>(j)])
            for (int k : inst.edge_products[static_cast<size_t>(e)]) {
                const int ep = ix.find_ep(e, k);
                if (ep < 0 || !used[static_cast<size_t>(ep)]) continue;
                const double lead = map_get(inst.edge(e).lead_time, inst.product(k).id);
                plan.arrival[static_cast<size_t>(ep)] =
                    plan.ready[static_cast<size_t>(ix.find_dispatch(j, k))] + lead;
            }
    }

    for (size_t ep = 0; ep < ix.edge_products.size(); ++ep) {
        plan.late_flag[ep] = 0.0;
        plan.late_product[ep] = 0.0;
        plan.late_penalty[ep] = 0.0;
        if (!used[ep] || !detail::lateness_active(inst, policy, ix.edge_products[ep])) continue;
        const auto& epk = ix.edge_products[ep];
        const Edge& edge = inst.edges[static_cast<size_t>(epk.edge)];
        const double t = *inst.due_time(inst.find_entity(edge.to), epk.product);
        if (plan.arrival[ep] > t) {
            plan.late_flag[ep] = 1.0;
            plan.late_product[ep] = plan.arrival[ep];
            const double cf =
                policy.fixed_weight * map_get(edge.fixed_late_penalty, inst.product(epk.product).id);
            const double cu =
                policy.unit_weight * map_get(edge.unit_late_penalty, inst.product(epk.product).id);
            plan.late_penalty[ep] = cf + cu * (plan.arrival[ep] - t);
        }
    }
    return plan;
}

struct CostBreakdown {
    double variable_cost = 0.0;  // transportation + holding + production
    double fixed_cost = 0.0;     // route openings + production lines
    double penalty_cost = 0.0;   // shortage + late delivery
    double total() const { return variable_cost + fixed_cost + penalty_cost; }
};

// Recomputes the three objective groups straight from instance data and the
// plan, with arrivals and penalties in their original bilinear form. Never
// reads the program's objective row.
inline CostBreakdown evaluate_objective(const SupplyChainInstance& inst,
                                        const LatenessPolicy& policy, const VariableIndex& ix,
                                        const FlowPlan& plan) {
    CostBreakdown cb;
    for (size_t ep = 0; ep < ix.edge_products.size(); ++ep) {
        const auto& epk = ix.edge_products[ep];
        const Edge& e = inst.edges[static_cast<size_t>(epk.edge)];
        const std::string& pidk = inst.product(epk.product).id;
        cb.variable_cost += map_get(e.unit_cost, pidk) * plan.flow[ep];
        cb.fixed_cost += e.fixed_cost * plan.edge_open[ep];
    }
    for (size_t pp = 0; pp < ix.producible_pairs.size(); ++pp) {
        const auto& ik = ix.producible_pairs[pp];
        cb.variable_cost += map_get(inst.entity(ik.entity).production_cost,
                                    inst.product(ik.product).id) *
                            plan.production[pp];
    }
    for (size_t pr = 0; pr < ix.presence_pairs.size(); ++pr) {
        const auto& ik = ix.presence_pairs[pr];
        cb.variable_cost +=
            map_get(inst.entity(ik.entity).holding_cost, inst.product(ik.product).id) *
            plan.inventory[pr];
    }
    for (int i = 0; i < ix.num_entities; ++i)
        cb.fixed_cost += inst.entity(i).open_cost * plan.line_open[static_cast<size_t>(i)];
    for (size_t dp = 0; dp < ix.demand_pairs.size(); ++dp) {
        const auto& ik = ix.demand_pairs[dp];
        cb.penalty_cost +=
            map_get(inst.entity(ik.entity).shortage_penalty, inst.product(ik.product).id) *
            plan.shortage[dp];
    }
    for (size_t ep = 0; ep < ix.edge_products.size(); ++ep) {
        const auto& epk = ix.edge_products[ep];
        if (!detail::lateness_active(inst, policy, ix.edge_products[ep])) continue;
        const Edge& e = inst.edges[static_cast<size_t>(epk.edge)];
        const std::string& pidk = inst.product(epk.product).id;
        const double t = *inst.due_time(inst.find_entity(e.to), epk.product);
        const double from_o =
            plan.ready[static_cast<size_t>(ix.find_dispatch(inst.find_entity(e.from), epk.product))];
        const double lead = map_get(e.lead_time, pidk);
        const double arrival = (lead + from_o) * plan.edge_open[ep];
        cb.penalty_cost += plan.late_flag[ep] *
                           (policy.fixed_weight * map_get(e.fixed_late_penalty, pidk) +
                            policy.unit_weight * map_get(e.unit_late_penalty, pidk) * (arrival - t));
    }
    return cb;
}

inline CostBreakdown evaluate_objective(const SupplyChainInstance& inst,
                                        const LatenessPolicy& policy, const FlowPlan& plan) {
    return evaluate_objective(inst, policy, build_variable_index(inst), plan);
}

// Checks a plan against the original constraints, bilinear forms included.
inline std::vector<Violation> check_feasibility(const SupplyChainInstance& inst,
                                                const LatenessPolicy& policy,
                                                const VariableIndex& ix, const FlowPlan& plan,
                                                double tol) {
    if (!(tol > 0.0)) throw ChainflowError("check_feasibility: tol must be > 0");
    std::vector<Violation> out;
    auto flag = [&](std::string code, std::string subject, double residual) {
        if (residual > tol)
            out.push_back({std::move(code), std::move(subject),
                           "constraint violated by " + fmt_num(residual), residual});
    };
    auto pid = [&](int k) -> const std::string& { return inst.product(k).id; };

    // (2b) flow balance
    for (size_t pr = 0; pr < ix.presence_pairs.size(); ++pr) {
        const auto& ik = ix.presence_pairs[pr];
        const Entity& ent = inst.entity(ik.entity);
        double lhs = 0.0;
        for (int e : inst.out_edges[static_cast<size_t>(ik.entity)]) {
            const int ep = ix.find_ep(e, ik.product);
            if (ep >= 0) lhs += plan.flow[static_cast<size_t>(ep)];
        }
        for (int e : inst.in_edges[static_cast<size_t>(ik.entity)]) {
            const int ep = ix.find_ep(e, ik.product);
            if (ep >= 0) lhs -= plan.flow[static_cast<size_t>(ep)];
        }
        for (const auto& [succ, rate] : inst.bom_consumers[static_cast<size_t>(ik.product)]) {
            auto it = ix.produce_pos.find({ik.entity, succ});
            if (it != ix.produce_pos.end())
                lhs += rate * plan.production[static_cast<size_t>(it->second)];
        }
        {
            auto it = ix.produce_pos.find({ik.entity, ik.product});
            if (it != ix.produce_pos.end()) lhs -= plan.production[static_cast<size_t>(it->second)];
        }
        {
            auto it = ix.demand_pos.find({ik.entity, ik.product});
            if (it != ix.demand_pos.end()) lhs += plan.satisfied[static_cast<size_t>(it->second)];
        }
        lhs += plan.inventory[pr];
        flag("balance", detail::ik_name(inst, ik),
             std::fabs(lhs - map_get(ent.initial_inventory, pid(ik.product))));
    }
    // (2c)/(2d) edge capacities
    for (size_t ep = 0; ep < ix.edge_products.size(); ++ep) {
        const auto& epk = ix.edge_products[ep];
        const Edge& e = inst.edges[static_cast<size_t>(epk.edge)];
        flag("cap_edge", detail::ep_name(inst, epk),
             plan.flow[ep] - e.capacity * plan.edge_open[ep]);
    }
    for (size_t e = 0; e < inst.edges.size(); ++e) {
        double sum = 0.0;
        for (int k : inst.edge_products[e]) sum += plan.flow[static_cast<size_t>(ix.find_ep(static_cast<int>(e), k))];
        flag("cap_mixed", inst.edges[e].from + "," + inst.edges[e].to, sum - inst.edges[e].capacity);
    }
    // (2e) production capacity
    for (int i = 0; i < ix.num_entities; ++i) {
        const auto prods = inst.producible(i);
        if (prods.empty()) continue;
        double sum = 0.0;
        for (int k : prods) sum += plan.production[static_cast<size_t>(ix.produce_pos.at({i, k}))];
        flag("cap_prod", inst.entity(i).id,
             sum - inst.entity(i).production_capacity * plan.line_open[static_cast<size_t>(i)]);
    }
    // (2f) shortage accounting (normalized)
    for (size_t dp = 0; dp < ix.demand_pairs.size(); ++dp) {
        const auto& ik = ix.demand_pairs[dp];
        const double demand = map_get(inst.entity(ik.entity).demand, pid(ik.product));
        flag("shortfall", detail::ik_name(inst, ik),
             demand - plan.satisfied[dp] - plan.shortage[dp]);
        flag("oversatisfied", detail::ik_name(inst, ik), plan.satisfied[dp] - demand);
    }
    // (2g) arrival in its original bilinear form
    for (size_t ep = 0; ep < ix.edge_products.size(); ++ep) {
        const auto& epk = ix.edge_products[ep];
        const Edge& e = inst.edges[static_cast<size_t>(epk.edge)];
        const double lead = map_get(e.lead_time, pid(epk.product));
        const double from_o =
            plan.ready[static_cast<size_t>(ix.find_dispatch(inst.find_entity(e.from), epk.product))];
        flag("arrival", detail::ep_name(inst, epk),
             std::fabs(plan.arrival[ep] - (lead + from_o) * plan.edge_open[ep]));
    }
    // (2h) readiness
    for (const auto& [key, req] : inst.requirements) {
        const auto& [j, k] = key;
        const double o_jk = plan.ready[static_cast<size_t>(ix.find_dispatch(j, k))];
        for (int e : inst.in_edges[static_cast<size_t>(j)])
            for (int comp : req) {
                const int ep = ix.find_ep(e, comp);
                if (ep < 0) continue;
                flag("readiness",
                     inst.entity(j).id + "," + pid(k) + "," + inst.edge(e).from + "," + pid(comp),
                     plan.arrival[static_cast<size_t>(ep)] - o_jk);
            }
    }
    // (2i) supplier anchor
    for (size_t dp = 0; dp < ix.dispatch_pairs.size(); ++dp) {
        const auto& ik = ix.dispatch_pairs[dp];
        if (inst.entity(ik.entity).kind == EntityKind::Supplier)
            flag("supplier_anchor", detail::ik_name(inst, ik), std::fabs(plan.ready[dp]));
    }
    // (2j)/(2k) lateness rows
    const BigMTable bm = compute_big_m(inst, ix);
    for (size_t ep = 0; ep < ix.edge_products.size(); ++ep) {
        const auto& epk = ix.edge_products[ep];
        const Edge& e = inst.edges[static_cast<size_t>(epk.edge)];
        const auto due = inst.due_time(inst.find_entity(e.to), epk.product);
        if (!policy.penalized() || !due) {
            flag("late_flag_fixed", detail::ep_name(inst, epk), std::fabs(plan.late_flag[ep]));
            flag("late_penalty_fixed", detail::ep_name(inst, epk),
                 std::fabs(plan.late_penalty[ep]));
            continue;
        }
        flag("late_indicator", detail::ep_name(inst, epk),
             plan.arrival[ep] - *due - bm.late_big_m[ep] * plan.late_flag[ep]);
        const double cf = policy.fixed_weight * map_get(e.fixed_late_penalty, pid(epk.product));
        const double cu = policy.unit_weight * map_get(e.unit_late_penalty, pid(epk.product));
        const double want = plan.late_flag[ep] * (cf + cu * (plan.arrival[ep] - *due));
        flag("late_penalty", detail::ep_name(inst, epk), std::fabs(plan.late_penalty[ep] - want));
    }
    // (2l) nonnegativity
    auto check_nonneg = [&](const std::vector<double>& vals, const char* code) {
        for (size_t i = 0; i < vals.size(); ++i) flag(code, std::to_string(i), -vals[i]);
    };
    check_nonneg(plan.flow, "nonneg_y");
    check_nonneg(plan.satisfied, "nonneg_x");
    check_nonneg(plan.inventory, "nonneg_I");
    check_nonneg(plan.shortage, "nonneg_delta");
    check_nonneg(plan.arrival, "nonneg_a");
    check_nonneg(plan.ready, "nonneg_o");
    check_nonneg(plan.late_penalty, "nonneg_w");
    check_nonneg(plan.production, "nonneg_p");
    // (2m) binary domains
    auto check_binary = [&](const std::vector<double>& vals, const char* code) {
        for (size_t i = 0; i < vals.size(); ++i)
            flag(code, std::to_string(i), std::fabs(vals[i] - std::round(vals[i])));
    };
    check_binary(plan.edge_open, "binary_beta");
    check_binary(plan.line_open, "binary_zeta");
    check_binary(plan.late_flag, "binary_z");
    return out;
}

inline std::vector<Violation> check_feasibility(const SupplyChainInstance& inst,
                                                const LatenessPolicy& policy, const FlowPlan& plan,
                                                double tol) {
    return check_feasibility(inst, policy, build_variable_index(inst), plan, tol);
}

}  // namespace chainflow
