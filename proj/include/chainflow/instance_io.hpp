#pragma once

#include <string>

#include <json.hpp>

#include "chainflow/instance.hpp"

namespace chainflow {

namespace detail {

using nlohmann::json;

inline ProductMap read_product_map(const json& j, const std::string& owner, const char* field) {
    ProductMap out;
    if (!j.contains(field)) return out;
    const json& m = j.at(field);
    if (!m.is_object())
        throw ChainflowError(owner + ": field '" + field + "' must be an object keyed by product id");
    for (auto it = m.begin(); it != m.end(); ++it) {
        if (!it.value().is_number())
            throw ChainflowError(owner + ": field '" + field + "." + it.key() + "' must be a number");
        out[it.key()] = it.value().get<double>();
    }
    return out;
}

inline double read_number(const json& j, const std::string& owner, const char* field,
                          double fallback) {
    if (!j.contains(field)) return fallback;
    if (!j.at(field).is_number())
        throw ChainflowError(owner + ": field '" + field + "' must be a number");
    return j.at(field).get<double>();
}

inline std::string read_string(const json& j, const std::string& owner, const char* field) {
    if (!j.contains(field) || !j.at(field).is_string())
        throw ChainflowError(owner + ": missing required string field '" + field + "'");
    return j.at(field).get<std::string>();
}

inline json product_map_to_json(const ProductMap& m) {
    json out = json::object();
    for (const auto& [pid, v] : m) out[pid] = v;
    return out;
}

inline Entity entity_from_json(const json& ej, const std::string& origin) {
    Entity ent;
    ent.id = read_string(ej, origin + ": entity", "id");
    const std::string owner = origin + ": entity " + ent.id;
    auto kind = entity_kind_from_string(read_string(ej, owner, "kind"));
    if (!kind) throw ChainflowError(owner + ": kind must be supplier|oem|distributor|customer");
    ent.kind = *kind;
    ent.production_capacity = read_number(ej, owner, "production_capacity", 0.0);
    ent.open_cost = read_number(ej, owner, "open_cost", 0.0);
    ent.production_cost = read_product_map(ej, owner, "production_cost");
    ent.holding_cost = read_product_map(ej, owner, "holding_cost");
    ent.initial_inventory = read_product_map(ej, owner, "initial_inventory");
    ent.demand = read_product_map(ej, owner, "demand");
    ent.shortage_penalty = read_product_map(ej, owner, "shortage_penalty");
    ent.due_time = read_product_map(ej, owner, "due_time");
    return ent;
}

inline Edge edge_from_json(const json& ej, const std::string& origin) {
    Edge e;
    e.from = read_string(ej, origin + ": edge", "from");
    e.to = read_string(ej, origin + ": edge", "to");
    const std::string owner = origin + ": edge " + e.from + "->" + e.to;
    if (!ej.contains("capacity"))
        throw ChainflowError(owner + ": 'capacity' is required on every edge");
    e.capacity = read_number(ej, owner, "capacity", 0.0);
    e.fixed_cost = read_number(ej, owner, "fixed_cost", 0.0);
    e.unit_cost = read_product_map(ej, owner, "unit_cost");
    e.lead_time = read_product_map(ej, owner, "lead_time");
    e.fixed_late_penalty = read_product_map(ej, owner, "fixed_late_penalty");
    e.unit_late_penalty = read_product_map(ej, owner, "unit_late_penalty");
    return e;
}

}  // namespace detail

inline SupplyChainInstance instance_from_json(const nlohmann::json& doc, const std::string& origin) {
    using detail::read_number;
    using detail::read_product_map;
    using detail::read_string;

    if (!doc.is_object()) throw ChainflowError(origin + ": instance document must be an object");
    if (!doc.contains("schema") || !doc.at("schema").is_number_integer() ||
        doc.at("schema").get<int>() != 1)
        throw ChainflowError(origin + ": unsupported or missing 'schema' (expected 1)");

    SupplyChainInstance inst;
    if (doc.contains("name")) inst.name = doc.at("name").get<std::string>();

    for (const auto& pj : doc.value("products", nlohmann::json::array())) {
        Product p;
        p.id = read_string(pj, origin + ": product", "id");
        p.name = pj.value("name", p.id);
        inst.products.push_back(std::move(p));
    }
    for (const auto& bj : doc.value("bom", nlohmann::json::array())) {
        BomRule r;
        r.component = read_string(bj, origin + ": bom rule", "component");
        r.successor = read_string(bj, origin + ": bom rule", "successor");
        r.conversion_rate = read_number(bj, origin + ": bom rule", "conversion_rate", 1.0);
        inst.bom.push_back(std::move(r));
    }
    for (const auto& ej : doc.value("entities", nlohmann::json::array()))
        inst.entities.push_back(detail::entity_from_json(ej, origin));
    for (const auto& ej : doc.value("edges", nlohmann::json::array()))
        inst.edges.push_back(detail::edge_from_json(ej, origin));

    // Reference resolution is a load-time error, not a validation finding.
    auto require_known_products = [&](const ProductMap& m, const std::string& owner) {
        for (const auto& [pid, v] : m) {
            (void)v;
            bool known = false;
            for (const auto& p : inst.products) known = known || p.id == pid;
            if (!known)
                throw ChainflowError(origin + ": " + owner + " references unknown product '" + pid +
                                     "'");
        }
    };
    auto known_entity = [&](const std::string& id) {
        for (const auto& ent : inst.entities)
            if (ent.id == id) return true;
        return false;
    };
    for (const auto& r : inst.bom) {
        require_known_products({{r.component, 0.0}}, "bom rule");
        require_known_products({{r.successor, 0.0}}, "bom rule");
    }
    for (const auto& ent : inst.entities) {
        const std::string owner = "entity " + ent.id;
        require_known_products(ent.production_cost, owner);
        require_known_products(ent.holding_cost, owner);
        require_known_products(ent.initial_inventory, owner);
        require_known_products(ent.demand, owner);
        require_known_products(ent.shortage_penalty, owner);
        require_known_products(ent.due_time, owner);
    }
    for (const auto& e : inst.edges) {
        const std::string owner = "edge " + e.from + "->" + e.to;
        if (!known_entity(e.from))
            throw ChainflowError(origin + ": " + owner + " references unknown entity '" + e.from + "'");
        if (!known_entity(e.to))
            throw ChainflowError(origin + ": " + owner + " references unknown entity '" + e.to + "'");
        require_known_products(e.unit_cost, owner);
        require_known_products(e.lead_time, owner);
        require_known_products(e.fixed_late_penalty, owner);
        require_known_products(e.unit_late_penalty, owner);
        // lead_time is mandatory wherever any cost or penalty entry exists
        for (const auto* m : {&e.unit_cost, &e.fixed_late_penalty, &e.unit_late_penalty})
            for (const auto& [pid, v] : *m) {
                (void)v;
                if (!e.lead_time.count(pid))
                    throw ChainflowError(origin + ": " + owner + " lacks lead_time for product '" +
                                         pid + "'");
            }
    }

    inst.finalize();
    return inst;
}

inline SupplyChainInstance load_instance(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& err) {
        throw ChainflowError(path + ": parse error: " + err.what());
    }
    return instance_from_json(doc, path);
}

inline nlohmann::json instance_to_json(const SupplyChainInstance& inst) {
    using detail::product_map_to_json;
    nlohmann::json doc;
    doc["schema"] = 1;
    if (!inst.name.empty()) doc["name"] = inst.name;
    doc["products"] = nlohmann::json::array();
    for (const auto& p : inst.products) doc["products"].push_back({{"id", p.id}, {"name", p.name}});
    doc["bom"] = nlohmann::json::array();
    for (const auto& r : inst.bom)
        doc["bom"].push_back({{"component", r.component},
                              {"successor", r.successor},
                              {"conversion_rate", r.conversion_rate}});
    doc["entities"] = nlohmann::json::array();
    for (const auto& ent : inst.entities) {
        nlohmann::json ej;
        ej["id"] = ent.id;
        ej["kind"] = to_string(ent.kind);
        ej["production_capacity"] = ent.production_capacity;
        ej["open_cost"] = ent.open_cost;
        ej["production_cost"] = product_map_to_json(ent.production_cost);
        ej["holding_cost"] = product_map_to_json(ent.holding_cost);
        ej["initial_inventory"] = product_map_to_json(ent.initial_inventory);
        ej["demand"] = product_map_to_json(ent.demand);
        ej["shortage_penalty"] = product_map_to_json(ent.shortage_penalty);
        ej["due_time"] = product_map_to_json(ent.due_time);
        doc["entities"].push_back(std::move(ej));
    }
    doc["edges"] = nlohmann::json::array();
    for (const auto& e : inst.edges) {
        nlohmann::json ej;
        ej["from"] = e.from;
        ej["to"] = e.to;
        ej["capacity"] = e.capacity;
        ej["fixed_cost"] = e.fixed_cost;
        ej["unit_cost"] = product_map_to_json(e.unit_cost);
        ej["lead_time"] = product_map_to_json(e.lead_time);
        ej["fixed_late_penalty"] = product_map_to_json(e.fixed_late_penalty);
        ej["unit_late_penalty"] = product_map_to_json(e.unit_late_penalty);
        doc["edges"].push_back(std::move(ej));
    }
    return doc;
}

inline void save_instance(const SupplyChainInstance& inst, const std::string& path) {
    write_text_atomic(path, instance_to_json(inst).dump(2) + "\n");
}

inline VariantEdits variant_edits_from_json(const nlohmann::json& doc, const std::string& origin) {
    VariantEdits edits;
    if (doc.is_null()) return edits;
    if (!doc.is_object()) throw ChainflowError(origin + ": variant edits must be an object");
    for (const auto& id : doc.value("remove_entities", nlohmann::json::array()))
        edits.remove_entities.push_back(id.get<std::string>());
    for (const auto& ej : doc.value("remove_edges", nlohmann::json::array()))
        edits.remove_edges.emplace_back(detail::read_string(ej, origin + ": remove_edges", "from"),
                                        detail::read_string(ej, origin + ": remove_edges", "to"));
    // Added entities and edges may reference products of the base instance;
    // resolution happens later, when topology_variant finalizes the result.
    for (const auto& ej : doc.value("add_entities", nlohmann::json::array()))
        edits.add_entities.push_back(detail::entity_from_json(ej, origin));
    for (const auto& ej : doc.value("add_edges", nlohmann::json::array()))
        edits.add_edges.push_back(detail::edge_from_json(ej, origin));
    const nlohmann::json caps = doc.value("set_production_capacity", nlohmann::json::object());
    for (auto it = caps.begin(); it != caps.end(); ++it)
        edits.set_production_capacity[it.key()] = it.value().get<double>();
    for (const auto& ej : doc.value("set_edge_capacity", nlohmann::json::array()))
        edits.set_edge_capacity.emplace_back(
            detail::read_string(ej, origin + ": set_edge_capacity", "from"),
            detail::read_string(ej, origin + ": set_edge_capacity", "to"),
            detail::read_number(ej, origin + ": set_edge_capacity", "capacity", 0.0));
    return edits;
}

inline VariantEdits load_variant_edits(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& err) {
        throw ChainflowError(path + ": parse error: " + err.what());
    }
    return variant_edits_from_json(doc, path);
}

}  // namespace chainflow
