#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "chainflow/chainflow.hpp"

namespace testsupport {

inline std::string data_path(const std::string& name) {
    return std::string(CHAINFLOW_DATA_DIR) + "/" + name;
}

inline std::string golden_path(const std::string& name) {
    return std::string(CHAINFLOW_GOLDEN_DIR) + "/" + name;
}

inline bool close(double a, double b, double tol = 1e-9) { return std::fabs(a - b) <= tol; }

inline bool close_rel(double a, double b, double tol = 1e-6) {
    return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

// Smallest legal network: one supplier shipping straight to one customer.
inline chainflow::SupplyChainInstance two_node_instance() {
    chainflow::SupplyChainInstance inst;
    inst.name = "two_node";
    inst.products.push_back({"goods", "Goods"});
    chainflow::Entity s;
    s.id = "S";
    s.kind = chainflow::EntityKind::Supplier;
    s.production_capacity = 0.0;
    s.initial_inventory["goods"] = 5.0;
    chainflow::Entity c;
    c.id = "C";
    c.kind = chainflow::EntityKind::Customer;
    c.demand["goods"] = 4.0;
    c.shortage_penalty["goods"] = 10.0;
    inst.entities = {s, c};
    chainflow::Edge e;
    e.from = "S";
    e.to = "C";
    e.capacity = 3.0;
    e.unit_cost["goods"] = 1.0;
    e.lead_time["goods"] = 2.0;
    inst.edges = {e};
    inst.finalize();
    return inst;
}

// Three entities in a line with lead times 2 then 5; used by the big-M cases.
inline chainflow::SupplyChainInstance chain_instance() {
    chainflow::SupplyChainInstance inst;
    inst.name = "chain3";
    inst.products.push_back({"goods", "Goods"});
    chainflow::Entity s;
    s.id = "S";
    s.kind = chainflow::EntityKind::Supplier;
    s.production_capacity = 10.0;
    s.production_cost["goods"] = 1.0;
    chainflow::Entity a;
    a.id = "A";
    a.kind = chainflow::EntityKind::Distributor;
    chainflow::Entity d;
    d.id = "D";
    d.kind = chainflow::EntityKind::Customer;
    d.demand["goods"] = 4.0;
    d.shortage_penalty["goods"] = 50.0;
    d.due_time["goods"] = 8.0;
    inst.entities = {s, a, d};
    chainflow::Edge e1;
    e1.from = "S";
    e1.to = "A";
    e1.capacity = 6.0;
    e1.unit_cost["goods"] = 1.0;
    e1.lead_time["goods"] = 2.0;
    chainflow::Edge e2;
    e2.from = "A";
    e2.to = "D";
    e2.capacity = 6.0;
    e2.unit_cost["goods"] = 1.0;
    e2.lead_time["goods"] = 5.0;
    e2.fixed_late_penalty["goods"] = 3.0;
    e2.unit_late_penalty["goods"] = 3.0;
    inst.edges = {e1, e2};
    inst.finalize();
    return inst;
}

// Deterministic layered generator for property tests: 1-2 suppliers, an
// optional assembler, an optional distributor, 1-2 customers. Demand can
// always go short against a finite penalty, so every instance admits a plan.
inline chainflow::SupplyChainInstance random_supply_instance(std::uint64_t seed) {
    std::uint64_t state = seed;
    auto rnd = [&]() { return chainflow::splitmix64(state); };
    auto uniform = [&](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rnd() >> 11) * 0x1p-53);
    };
    auto pick = [&](int lo, int hi) {
        return lo + static_cast<int>(rnd() % static_cast<std::uint64_t>(hi - lo + 1));
    };

    chainflow::SupplyChainInstance inst;
    inst.name = "rand" + std::to_string(seed);
    const int n_suppliers = pick(1, 2);
    const bool has_oem = pick(0, 1) == 1;
    const bool has_dist = pick(0, 1) == 1;
    // at most 5 entities total, which keeps the binary count oracle-friendly
    const int room = 5 - n_suppliers - (has_oem ? 1 : 0) - (has_dist ? 1 : 0);
    const int n_customers = pick(1, std::min(2, room));

    inst.products.push_back({"alpha", "Alpha"});
    std::string final_product = "alpha";
    if (has_oem) {
        inst.products.push_back({"omega", "Omega"});
        inst.bom.push_back({"alpha", "omega", static_cast<double>(pick(1, 2))});
        final_product = "omega";
    }

    std::vector<std::string> tails;  // entities feeding the customer layer
    for (int i = 0; i < n_suppliers; ++i) {
        chainflow::Entity s;
        s.id = "S" + std::to_string(i + 1);
        s.kind = chainflow::EntityKind::Supplier;
        s.production_capacity = uniform(5.0, 20.0);
        s.open_cost = uniform(0.0, 3.0);
        s.production_cost["alpha"] = uniform(0.5, 3.0);
        s.holding_cost["alpha"] = 0.1;
        inst.entities.push_back(s);
    }
    std::string mid = "";
    if (has_oem) {
        chainflow::Entity a;
        a.id = "A1";
        a.kind = chainflow::EntityKind::Oem;
        a.production_capacity = uniform(4.0, 15.0);
        a.open_cost = uniform(0.0, 3.0);
        a.production_cost["omega"] = uniform(0.5, 3.0);
        a.holding_cost["alpha"] = 0.1;
        a.holding_cost["omega"] = 0.1;
        inst.entities.push_back(a);
        mid = "A1";
    }
    if (has_dist) {
        chainflow::Entity d;
        d.id = "D1";
        d.kind = chainflow::EntityKind::Distributor;
        d.holding_cost[final_product] = 0.1;
        inst.entities.push_back(d);
    }
    for (int i = 0; i < n_customers; ++i) {
        chainflow::Entity c;
        c.id = "C" + std::to_string(i + 1);
        c.kind = chainflow::EntityKind::Customer;
        c.demand[final_product] = static_cast<double>(pick(1, 6));
        c.shortage_penalty[final_product] = uniform(20.0, 60.0);
        if (pick(0, 1) == 1) c.due_time[final_product] = uniform(2.0, 12.0);
        inst.entities.push_back(c);
    }

    auto add_edge = [&](const std::string& from, const std::string& to, const std::string& product,
                        bool penalized) {
        chainflow::Edge e;
        e.from = from;
        e.to = to;
        e.capacity = uniform(3.0, 15.0);
        e.fixed_cost = uniform(0.0, 2.0);
        e.unit_cost[product] = uniform(0.2, 2.5);
        e.lead_time[product] = uniform(1.0, 5.0);
        if (penalized) {
            const double pen = uniform(0.0, 3.0);
            e.fixed_late_penalty[product] = pen;
            e.unit_late_penalty[product] = pen;
        }
        inst.edges.push_back(e);
    };

    const std::string hub = !mid.empty() ? mid : (has_dist ? "D1" : "");
    for (int i = 0; i < n_suppliers; ++i) {
        const std::string sid = "S" + std::to_string(i + 1);
        if (!hub.empty())
            add_edge(sid, hub, "alpha", false);
        else
            for (int c = 0; c < n_customers; ++c)
                add_edge(sid, "C" + std::to_string(c + 1), "alpha", true);
    }
    if (has_oem && has_dist) add_edge("A1", "D1", final_product, false);
    const std::string tail = has_dist ? "D1" : (has_oem ? "A1" : "");
    if (!tail.empty())
        for (int c = 0; c < n_customers; ++c)
            add_edge(tail, "C" + std::to_string(c + 1), final_product, true);
    (void)tails;

    inst.finalize();
    return inst;
}

// Random bounded MIPs for the solver-versus-oracle battery. Mixes feasible
// and infeasible programs; every column keeps finite bounds.
inline chainflow::MixedIntegerProgram random_program(std::uint64_t seed, int max_binaries) {
    std::uint64_t state = seed;
    auto rnd = [&]() { return chainflow::splitmix64(state); };
    auto uniform = [&](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rnd() >> 11) * 0x1p-53);
    };
    auto pick = [&](int lo, int hi) {
        return lo + static_cast<int>(rnd() % static_cast<std::uint64_t>(hi - lo + 1));
    };

    chainflow::MixedIntegerProgram p;
    p.name = "RAND" + std::to_string(seed);
    const int binaries = pick(0, max_binaries);
    const int n = pick(std::max(4, binaries + 1), 60);
    for (int j = 0; j < n; ++j) {
        if (j < binaries) {
            p.add_column("b" + std::to_string(j), 0.0, 1.0, uniform(-5.0, 5.0),
                         chainflow::VarKind::Binary);
        } else {
            const double lo = uniform(-4.0, 1.0);
            p.add_column("c" + std::to_string(j), lo, lo + uniform(0.5, 8.0), uniform(-5.0, 5.0));
        }
    }
    const int m = pick(2, 28);
    // roughly three programs in ten get exactly one unsatisfiable row
    const int sour_row = pick(0, 9) < 3 ? pick(0, m - 1) : -1;
    for (int r = 0; r < m; ++r) {
        std::vector<std::pair<int, double>> coeffs;
        const int nnz = pick(1, std::min(7, n));
        for (int t = 0; t < nnz; ++t) {
            const int col = pick(0, n - 1);
            bool seen = false;
            for (auto& [c, v] : coeffs)
                if (c == col) seen = true;
            if (!seen) coeffs.emplace_back(col, uniform(-4.0, 4.0));
        }
        // rhs anchored to the achievable activity range so most rows can hold;
        // roughly one row in ten is pushed deliberately out of reach
        double lo_act = 0.0, hi_act = 0.0;
        for (const auto& [c, a] : coeffs) {
            const auto& col = p.columns[static_cast<size_t>(c)];
            if (a >= 0.0) {
                lo_act += a * col.lower;
                hi_act += a * col.upper;
            } else {
                lo_act += a * col.upper;
                hi_act += a * col.lower;
            }
        }
        const double span = hi_act - lo_act;
        const bool sour = r == sour_row;
        const int roll = pick(0, 99);
        double rhs = 0.0;
        if (roll < 45) {
            rhs = sour ? lo_act - uniform(0.5, 3.0) : lo_act + uniform(0.1, 1.1) * (span + 0.5);
            p.add_row("r" + std::to_string(r), std::move(coeffs), chainflow::RowSense::LE, rhs);
        } else if (roll < 80) {
            rhs = sour ? hi_act + uniform(0.5, 3.0) : hi_act - uniform(0.1, 1.1) * (span + 0.5);
            p.add_row("r" + std::to_string(r), std::move(coeffs), chainflow::RowSense::GE, rhs);
        } else {
            rhs = sour ? hi_act + uniform(0.5, 3.0) : lo_act + uniform(0.05, 0.95) * span;
            p.add_row("r" + std::to_string(r), std::move(coeffs), chainflow::RowSense::EQ, rhs);
        }
    }
    return p;
}

}  // namespace testsupport
