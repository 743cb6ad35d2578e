#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chainflow/branch_bound.hpp"
#include "chainflow/instance.hpp"
#include "chainflow/instance_io.hpp"
#include "chainflow/mip_builder.hpp"
#include "chainflow/simulate.hpp"

namespace chainflow {

enum class ResponseLabel { K, E, V, R };

inline const char* to_string(ResponseLabel l) {
    switch (l) {
        case ResponseLabel::K: return "K";
        case ResponseLabel::E: return "E";
        case ResponseLabel::V: return "V";
        case ResponseLabel::R: return "R";
    }
    return "?";
}

// Strategy taxonomy, decided in severity order so stronger redesigns shadow
// weaker ones:
//   V  the disrupted entity carries no flow and produces nothing anymore;
//   E  some incident edge-product used in the baseline is dropped;
//   R  the used-edge set is unchanged but an incident flow shrank;
//   K  everything else.
inline ResponseLabel classify_response(const SupplyChainInstance& inst, const VariableIndex& ix,
                                       const FlowPlan& baseline, const FlowPlan& response,
                                       const std::string& disrupted, double tol = 1e-6) {
    if (baseline.flow.size() != response.flow.size() ||
        baseline.edge_open.size() != response.edge_open.size())
        throw ChainflowError("classify_response: plans are dimensionally mismatched");
    const int entity = inst.find_entity(disrupted);
    if (entity < 0) throw ChainflowError("classify_response: unknown entity '" + disrupted + "'");

    double throughput = 0.0;
    std::vector<int> incident_eps;
    for (int e : inst.in_edges[static_cast<size_t>(entity)])
        for (int k : inst.edge_products[static_cast<size_t>(e)]) incident_eps.push_back(ix.find_ep(e, k));
    for (int e : inst.out_edges[static_cast<size_t>(entity)])
        for (int k : inst.edge_products[static_cast<size_t>(e)]) incident_eps.push_back(ix.find_ep(e, k));
    for (int ep : incident_eps) throughput += response.flow[static_cast<size_t>(ep)];
    for (int k : inst.producible(entity))
        throughput += response.production[static_cast<size_t>(ix.produce_pos.at({entity, k}))];
    if (throughput <= tol) return ResponseLabel::V;

    for (int ep : incident_eps)
        if (baseline.edge_open[static_cast<size_t>(ep)] > 0.5 &&
            response.edge_open[static_cast<size_t>(ep)] < 0.5)
            return ResponseLabel::E;

    if (baseline.used_edges == response.used_edges) {
        for (int ep : incident_eps)
            if (baseline.flow[static_cast<size_t>(ep)] - response.flow[static_cast<size_t>(ep)] > tol)
                return ResponseLabel::R;
    }
    return ResponseLabel::K;
}

struct VariantSpec {
    TopologyVariant kind = TopologyVariant::Tree;
    VariantEdits edits;
};

struct StudyConfig {
    SupplyChainInstance base;
    std::vector<VariantSpec> variants;
    std::vector<Disruption> disruptions;
    std::vector<LatenessPolicy> policies;
    int replications = 300;
    double sigma = 0.3;
    std::uint64_t master_seed = 0;
    SolveOptions solver;
    int workers = 1;

    void check() const {
        if (variants.empty() || disruptions.empty() || policies.empty())
            throw ChainflowError(
                "study config requires nonempty variant, disruption and policy lists");
        if (replications < 1) throw ChainflowError("study config: replications must be >= 1");
    }
};

struct StudyCell {
    std::string variant;
    Disruption disruption;   // identity disruption marks a baseline row
    LatenessPolicy policy;
    bool is_baseline = false;
    std::string status = "ok";  // ok | infeasible | node_limit | baseline_infeasible
    std::optional<ResponseLabel> label;
    double baseline_objective = 0.0;
    double response_objective = 0.0;
    double mean_lateness = 0.0;
    double std_lateness = 0.0;
    int depth = 0;
    FlowPlan plan;
    SimulationReport sim;

    bool ok() const { return status == "ok"; }
};

struct StudyReport {
    std::vector<StudyCell> cells;  // baseline rows first per variant, then the grid
};

inline std::string study_csv(const StudyReport& report) {
    std::string out =
        "variant,entity,depth,policy,label,baseline_obj,response_obj,mean_lateness,std_lateness\n";
    for (const auto& c : report.cells) {
        out += c.variant + ",";
        out += (c.is_baseline ? "-" : c.disruption.entity) + ",";
        out += std::to_string(c.depth) + ",";
        out += (c.is_baseline ? "baseline" : to_string(c.policy)) + ",";
        if (!c.ok()) {
            std::string status = c.status;
            for (auto& ch : status)
                if (ch == ',' || ch == '\n') ch = ';';
            out += status;
        } else {
            out += c.is_baseline ? "-" : to_string(*c.label);
        }
        out += "," + fmt_num(c.baseline_objective) + "," + fmt_num(c.response_objective) + "," +
               fmt_num(c.mean_lateness) + "," + fmt_num(c.std_lateness) + "\n";
    }
    return out;
}

// Performance of the flow plans per the study grid. For every variant the
// undisrupted instance is solved once under the first configured policy (the
// baseline row); each (disruption, policy) cell then solves the disrupted
// instance, classifies the response against the variant baseline and
// simulates it under the disrupted lead times.
inline StudyReport run_study(const StudyConfig& config) {
    config.check();
    StudyReport report;

    int variant_counter = 0;
    for (const auto& vs : config.variants) {
        const SupplyChainInstance variant_inst =
            topology_variant(config.base, vs.kind, vs.edits);
        {
            const auto violations = validate(variant_inst);
            if (!violations.empty())
                throw ChainflowError("study variant " + std::string(to_string(vs.kind)) +
                                     " invalid: " + violation_line(violations[0]));
        }
        const std::uint64_t variant_seed =
            mix_seed(config.master_seed, static_cast<std::uint64_t>(variant_counter++));

        const LatenessPolicy baseline_policy = config.policies.front();
        BuildResult base_build = build_model(variant_inst, baseline_policy);
        const SolveReport base_solve = solve_milp(base_build.program, config.solver);

        StudyCell base_cell;
        base_cell.variant = to_string(vs.kind);
        base_cell.is_baseline = true;
        base_cell.policy = baseline_policy;
        base_cell.disruption = {"", 1.0, 1.0};
        if (base_solve.status != MilpStatus::Optimal &&
            base_solve.status != MilpStatus::GapReached) {
            base_cell.status = to_string(base_solve.status);
            report.cells.push_back(base_cell);
            for (const auto& d : config.disruptions)
                for (const auto& pol : config.policies) {
                    StudyCell cell;
                    cell.variant = to_string(vs.kind);
                    cell.disruption = d;
                    cell.policy = pol;
                    cell.status = "baseline_" + std::string(to_string(base_solve.status));
                    report.cells.push_back(cell);
                }
            continue;
        }

        FlowPlan baseline_plan = canonicalize_times(
            variant_inst, baseline_policy, base_build.index,
            extract_solution(base_build.program, base_build.index, base_solve.assignment));
        base_cell.baseline_objective = base_solve.objective;
        base_cell.response_objective = base_solve.objective;
        base_cell.plan = baseline_plan;
        base_cell.sim = run_replications(variant_inst, base_build.index, baseline_plan,
                                         LeadTimeModel::lognormal(config.sigma),
                                         config.replications, variant_seed, config.workers);
        base_cell.mean_lateness = base_cell.sim.overall_mean;
        base_cell.std_lateness = base_cell.sim.overall_std;
        report.cells.push_back(base_cell);

        int cell_counter = 0;
        for (const auto& d : config.disruptions) {
            for (const auto& pol : config.policies) {
                StudyCell cell;
                cell.variant = to_string(vs.kind);
                cell.disruption = d;
                cell.policy = pol;
                cell.baseline_objective = base_solve.objective;
                const std::uint64_t cell_seed =
                    mix_seed(variant_seed, static_cast<std::uint64_t>(++cell_counter));
                // Cell failures are recorded, never silently dropped.
                try {
                    const SupplyChainInstance disrupted = apply_disruption(variant_inst, d);
                    cell.depth = entity_depth(variant_inst, variant_inst.find_entity(d.entity));
                    BuildResult build = build_model(disrupted, pol);
                    const SolveReport solved = solve_milp(build.program, config.solver);
                    if (solved.status != MilpStatus::Optimal &&
                        solved.status != MilpStatus::GapReached) {
                        cell.status = to_string(solved.status);
                        report.cells.push_back(cell);
                        continue;
                    }
                    cell.response_objective = solved.objective;
                    cell.plan = canonicalize_times(
                        disrupted, pol, build.index,
                        extract_solution(build.program, build.index, solved.assignment));
                    cell.label = classify_response(variant_inst, build.index, baseline_plan,
                                                   cell.plan, d.entity);
                    cell.sim = run_replications(disrupted, build.index, cell.plan,
                                                LeadTimeModel::lognormal(config.sigma),
                                                config.replications, cell_seed, config.workers);
                    cell.mean_lateness = cell.sim.overall_mean;
                    cell.std_lateness = cell.sim.overall_std;
                } catch (const std::exception& err) {
                    cell.status = std::string("error: ") + err.what();
                }
                report.cells.push_back(cell);
            }
        }
    }
    return report;
}

struct LatenessSummaryRow {
    std::string variant;
    std::string entity;
    int depth = 0;
    double mean = 0.0;
    double stddev = 0.0;  // population std over the policy cells
};

// Pools each (variant, disruption) group over its lateness policies: the mean
// of the cell means and their spread, ready for an error-bar plot.
inline std::vector<LatenessSummaryRow> average_lateness_summary(const StudyReport& report) {
    std::vector<LatenessSummaryRow> rows;
    for (const auto& c : report.cells) {
        if (c.is_baseline || !c.ok()) continue;
        LatenessSummaryRow* row = nullptr;
        for (auto& r : rows)
            if (r.variant == c.variant && r.entity == c.disruption.entity) row = &r;
        if (!row) {
            rows.push_back({c.variant, c.disruption.entity, c.depth, 0.0, 0.0});
            row = &rows.back();
        }
    }
    for (auto& r : rows) {
        double sum = 0.0, sq = 0.0;
        int count = 0;
        for (const auto& c : report.cells) {
            if (c.is_baseline || !c.ok()) continue;
            if (c.variant != r.variant || c.disruption.entity != r.entity) continue;
            sum += c.mean_lateness;
            sq += c.mean_lateness * c.mean_lateness;
            ++count;
        }
        if (count > 0) {
            r.mean = sum / count;
            r.stddev = std::sqrt(std::max(0.0, sq / count - r.mean * r.mean));
        }
    }
    return rows;
}

inline std::string lateness_summary_csv(const std::vector<LatenessSummaryRow>& rows) {
    std::string out = "variant,entity,depth,mean_lateness,std_lateness\n";
    for (const auto& r : rows)
        out += r.variant + "," + r.entity + "," + std::to_string(r.depth) + "," + fmt_num(r.mean) +
               "," + fmt_num(r.stddev) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Config file
// ---------------------------------------------------------------------------

inline std::string path_dirname(const std::string& path) {
    const size_t slash = path.find_last_of('/');
    return slash == std::string::npos ? std::string(".") : path.substr(0, slash);
}

inline std::string path_join(const std::string& dir, const std::string& rel) {
    if (!rel.empty() && rel.front() == '/') return rel;
    return dir + "/" + rel;
}

inline StudyConfig load_study_config(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& err) {
        throw ChainflowError(path + ": parse error: " + err.what());
    }
    if (!doc.is_object() || doc.value("schema", 0) != 1)
        throw ChainflowError(path + ": unsupported or missing 'schema' (expected 1)");

    const std::string dir = path_dirname(path);
    StudyConfig config;
    if (!doc.contains("instance"))
        throw ChainflowError(path + ": 'instance' is required");
    config.base = load_instance(path_join(dir, doc.at("instance").get<std::string>()));

    for (const auto& vj : doc.value("variants", nlohmann::json::array())) {
        VariantSpec spec;
        const std::string name =
            vj.is_string() ? vj.get<std::string>() : vj.value("name", std::string());
        const auto kind = topology_variant_from_string(name);
        if (!kind) throw ChainflowError(path + ": unknown topology variant '" + name + "'");
        spec.kind = *kind;
        if (vj.is_object() && vj.contains("edits"))
            spec.edits = load_variant_edits(path_join(dir, vj.at("edits").get<std::string>()));
        config.variants.push_back(std::move(spec));
    }
    for (const auto& dj : doc.value("disruptions", nlohmann::json::array())) {
        Disruption d;
        d.entity = dj.at("entity").get<std::string>();
        d.lead_time_multiplier = dj.value("lead_time_multiplier", 1.0);
        d.capacity_multiplier = dj.value("capacity_multiplier", 1.0);
        config.disruptions.push_back(std::move(d));
    }
    for (const auto& pj : doc.value("policies", nlohmann::json::array()))
        config.policies.push_back(lateness_policy_from_string(pj.get<std::string>()));

    config.replications = doc.value("replications", 300);
    config.sigma = doc.value("sigma", 0.3);
    config.master_seed = doc.contains("master_seed")
                             ? doc.at("master_seed").get<std::uint64_t>()
                             : default_master_seed();
    config.workers = doc.value("workers", 1);
    if (doc.contains("solver")) {
        const auto& sj = doc.at("solver");
        config.solver.gap_tolerance = sj.value("gap_tolerance", config.solver.gap_tolerance);
        config.solver.node_limit = sj.value("node_limit", config.solver.node_limit);
        config.solver.integrality_tolerance =
            sj.value("integrality_tolerance", config.solver.integrality_tolerance);
        config.solver.feasibility_tolerance =
            sj.value("feasibility_tolerance", config.solver.feasibility_tolerance);
    }
    config.check();
    return config;
}

}  // namespace chainflow
