#pragma once

#include <string>

#include <json.hpp>

#include "chainflow/instance.hpp"
#include "chainflow/mip_builder.hpp"

namespace chainflow {

struct PlanFile {
    FlowPlan plan;
    LatenessPolicy policy;
    std::string instance_name;
};

inline nlohmann::json plan_to_json(const SupplyChainInstance& inst, const VariableIndex& ix,
                                   const LatenessPolicy& policy, const FlowPlan& plan) {
    nlohmann::json doc;
    doc["schema"] = 1;
    doc["instance"] = inst.name;
    doc["policy"] = to_string(policy);

    auto edge_family = [&](const std::vector<double>& vals) {
        nlohmann::json arr = nlohmann::json::array();
        for (size_t ep = 0; ep < ix.edge_products.size(); ++ep) {
            const auto& epk = ix.edge_products[ep];
            const Edge& e = inst.edges[static_cast<size_t>(epk.edge)];
            arr.push_back({{"from", e.from},
                           {"to", e.to},
                           {"product", inst.product(epk.product).id},
                           {"value", vals[ep]}});
        }
        return arr;
    };
    auto entity_family = [&](const std::vector<EntityProduct>& keys,
                             const std::vector<double>& vals) {
        nlohmann::json arr = nlohmann::json::array();
        for (size_t i = 0; i < keys.size(); ++i)
            arr.push_back({{"entity", inst.entity(keys[i].entity).id},
                           {"product", inst.product(keys[i].product).id},
                           {"value", vals[i]}});
        return arr;
    };

    doc["y"] = edge_family(plan.flow);
    doc["beta"] = edge_family(plan.edge_open);
    doc["x"] = entity_family(ix.demand_pairs, plan.satisfied);
    doc["p"] = entity_family(ix.producible_pairs, plan.production);
    {
        nlohmann::json arr = nlohmann::json::array();
        for (int i = 0; i < ix.num_entities; ++i)
            arr.push_back({{"entity", inst.entity(i).id},
                           {"value", plan.line_open[static_cast<size_t>(i)]}});
        doc["zeta"] = std::move(arr);
    }
    doc["I"] = entity_family(ix.presence_pairs, plan.inventory);
    doc["delta"] = entity_family(ix.demand_pairs, plan.shortage);
    doc["a"] = edge_family(plan.arrival);
    doc["o"] = entity_family(ix.dispatch_pairs, plan.ready);
    doc["z"] = edge_family(plan.late_flag);
    doc["w"] = edge_family(plan.late_penalty);
    doc["v"] = edge_family(plan.late_product);
    return doc;
}

inline void save_plan(const SupplyChainInstance& inst, const VariableIndex& ix,
                      const LatenessPolicy& policy, const FlowPlan& plan,
                      const std::string& path) {
    write_text_atomic(path, plan_to_json(inst, ix, policy, plan).dump(2) + "\n");
}

inline PlanFile plan_from_json(const SupplyChainInstance& inst, const VariableIndex& ix,
                               const nlohmann::json& doc, const std::string& origin) {
    if (!doc.is_object() || !doc.contains("schema") || doc.at("schema").get<int>() != 1)
        throw ChainflowError(origin + ": unsupported or missing plan 'schema' (expected 1)");
    PlanFile pf;
    pf.instance_name = doc.value("instance", "");
    pf.policy = lateness_policy_from_string(doc.value("policy", "none"));

    auto read_edge_family = [&](const char* key, std::vector<double>& vals) {
        vals.assign(ix.edge_products.size(), 0.0);
        for (const auto& entry : doc.value(key, nlohmann::json::array())) {
            const std::string from = entry.at("from").get<std::string>();
            const std::string to = entry.at("to").get<std::string>();
            const std::string product = entry.at("product").get<std::string>();
            int edge = -1;
            for (size_t e = 0; e < inst.edges.size(); ++e)
                if (inst.edges[e].from == from && inst.edges[e].to == to)
                    edge = static_cast<int>(e);
            const int k = inst.find_product(product);
            const int ep = edge >= 0 && k >= 0 ? ix.find_ep(edge, k) : -1;
            if (ep < 0)
                throw ChainflowError(origin + ": plan entry " + std::string(key) + "(" + from +
                                     "," + to + "," + product + ") not in instance");
            vals[static_cast<size_t>(ep)] = entry.at("value").get<double>();
        }
    };
    auto read_entity_family = [&](const char* key,
                                  const std::map<std::pair<int, int>, int>& pos,
                                  std::vector<double>& vals, size_t size) {
        vals.assign(size, 0.0);
        for (const auto& entry : doc.value(key, nlohmann::json::array())) {
            const std::string entity = entry.at("entity").get<std::string>();
            const std::string product = entry.at("product").get<std::string>();
            const int i = inst.find_entity(entity);
            const int k = inst.find_product(product);
            auto it = i >= 0 && k >= 0 ? pos.find({i, k}) : pos.end();
            if (it == pos.end())
                throw ChainflowError(origin + ": plan entry " + std::string(key) + "(" + entity +
                                     "," + product + ") not in instance");
            vals[static_cast<size_t>(it->second)] = entry.at("value").get<double>();
        }
    };

    read_edge_family("y", pf.plan.flow);
    read_edge_family("beta", pf.plan.edge_open);
    read_entity_family("x", ix.demand_pos, pf.plan.satisfied, ix.demand_pairs.size());
    read_entity_family("p", ix.produce_pos, pf.plan.production, ix.producible_pairs.size());
    {
        pf.plan.line_open.assign(static_cast<size_t>(ix.num_entities), 0.0);
        for (const auto& entry : doc.value("zeta", nlohmann::json::array())) {
            const int i = inst.find_entity(entry.at("entity").get<std::string>());
            if (i < 0)
                throw ChainflowError(origin + ": plan zeta entry names unknown entity");
            pf.plan.line_open[static_cast<size_t>(i)] = entry.at("value").get<double>();
        }
    }
    read_entity_family("I", ix.presence_pos, pf.plan.inventory, ix.presence_pairs.size());
    read_entity_family("delta", ix.demand_pos, pf.plan.shortage, ix.demand_pairs.size());
    read_edge_family("a", pf.plan.arrival);
    read_entity_family("o", ix.dispatch_pos, pf.plan.ready, ix.dispatch_pairs.size());
    read_edge_family("z", pf.plan.late_flag);
    read_edge_family("w", pf.plan.late_penalty);
    read_edge_family("v", pf.plan.late_product);
    pf.plan.derive_used_edges();
    return pf;
}

inline PlanFile load_plan(const SupplyChainInstance& inst, const VariableIndex& ix,
                          const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& err) {
        throw ChainflowError(path + ": parse error: " + err.what());
    }
    return plan_from_json(inst, ix, doc, path);
}

}  // namespace chainflow
