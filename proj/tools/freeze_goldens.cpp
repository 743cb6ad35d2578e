// Regenerates the golden files under tests/golden/ from the oracle paths:
// brute-force enumeration for plans/labels and the seeded simulator for
// replication records. Run from the repository root after any deliberate
// change to the bundled instances, then review the diff before committing.

#include <iostream>
#include <string>

#include <json.hpp>

#include "chainflow/chainflow.hpp"

using namespace chainflow;

namespace {

FlowPlan oracle_plan(const SupplyChainInstance& inst, const LatenessPolicy& policy,
                     double* objective_out = nullptr) {
    BuildResult build = build_model(inst, policy);
    const SolveReport report = brute_force_milp(build.program, 20);
    if (report.status != MilpStatus::Optimal)
        throw ChainflowError("oracle solve failed: " + std::string(to_string(report.status)));
    if (objective_out) *objective_out = report.objective;
    return canonicalize_times(inst, policy, build.index,
                              extract_solution(build.program, build.index, report.assignment));
}

}  // namespace

int main(int argc, char** argv) {
    const std::string data = argc > 1 ? argv[1] : "data";
    const std::string golden = argc > 2 ? argv[2] : "tests/golden";

    const SupplyChainInstance desk = load_instance(data + "/desk7.json");
    const VariableIndex ix = build_variable_index(desk);

    // 1. Regression instance: desk7 under 1:500 has exactly 12 free binaries.
    {
        const LatenessPolicy policy = lateness_policy_from_string("1:500");
        double objective = 0.0;
        const FlowPlan plan = oracle_plan(desk, policy, &objective);
        save_plan(desk, ix, policy, plan, golden + "/regression12_plan.json");
        write_text_atomic(golden + "/regression12_objective.txt", fmt_num_exact(objective) + "\n");
        std::cout << "regression12 objective " << fmt_num_exact(objective) << "\n";
    }

    // 2. Study labels for the bundled desk-scale sweep, via the oracle.
    {
        const Disruption shock{"S1", 2.0, 1.0};
        const SupplyChainInstance disrupted = apply_disruption(desk, shock);
        const LatenessPolicy baseline_policy = LatenessPolicy::none();
        double baseline_obj = 0.0;
        const FlowPlan baseline = oracle_plan(desk, baseline_policy, &baseline_obj);

        std::string csv = "entity,policy,label,baseline_obj,response_obj\n";
        for (const std::string policy_str : {"none", "1:0", "1:500", "1:5000"}) {
            const LatenessPolicy policy = lateness_policy_from_string(policy_str);
            double response_obj = 0.0;
            const FlowPlan response = oracle_plan(disrupted, policy, &response_obj);
            const ResponseLabel label = classify_response(desk, ix, baseline, response, "S1");
            csv += shock.entity + "," + policy_str + "," + to_string(label) + "," +
                   fmt_num_exact(baseline_obj) + "," + fmt_num_exact(response_obj) + "\n";
            std::cout << "desk study " << policy_str << " -> " << to_string(label) << " obj "
                      << fmt_num_exact(response_obj) << "\n";
        }
        write_text_atomic(golden + "/desk_study_labels.csv", csv);
    }

    // 3. Seeded simulation goldens on the undisrupted baseline plan.
    {
        const LatenessPolicy policy = LatenessPolicy::none();
        const FlowPlan plan = oracle_plan(desk, policy);
        const std::uint64_t seed = mix_seed(42, 0);
        RngStream stream(seed);
        const ReplicationResult rep =
            simulate_once(desk, ix, plan, LeadTimeModel::lognormal(0.3), stream, seed);
        nlohmann::json doc;
        doc["seed"] = rep.seed;
        for (size_t i = 0; i < rep.used_eps.size(); ++i) {
            const auto& epk = ix.edge_products[static_cast<size_t>(rep.used_eps[i])];
            doc["edges"].push_back(
                {{"from", desk.edges[static_cast<size_t>(epk.edge)].from},
                 {"to", desk.edges[static_cast<size_t>(epk.edge)].to},
                 {"product", desk.product(epk.product).id},
                 {"lead", fmt_num_exact(rep.realized_lead[i])},
                 {"arrival", fmt_num_exact(rep.realized_arrival[i])}});
        }
        for (size_t f = 0; f < rep.customer_eps.size(); ++f)
            doc["lateness"].push_back(fmt_num_exact(rep.lateness[f]));
        write_text_atomic(golden + "/desk_sim_seed42.json", doc.dump(2) + "\n");

        const SimulationReport report =
            run_replications(desk, ix, plan, LeadTimeModel::lognormal(0.3), 300, 42, 1);
        write_text_atomic(golden + "/desk_sim_300_mean.txt",
                          fmt_num_exact(report.overall_mean) + "\n");
        std::cout << "desk sim 300 mean " << fmt_num_exact(report.overall_mean) << "\n";
    }

    // 4. Pooled lateness summary of the bundled desk study (deterministic).
    {
        const StudyConfig config = load_study_config(data + "/study.cfg");
        const StudyReport report = run_study(config);
        write_text_atomic(golden + "/desk_study_summary.csv",
                          lateness_summary_csv(average_lateness_summary(report)));
        std::cout << "desk study summary frozen\n";
    }

    // 5. Model-size manifest for the 14-entity instance under 1:500.
    {
        const SupplyChainInstance auto14 = load_instance(data + "/auto14.json");
        BuildResult build = build_model(auto14, lateness_policy_from_string("1:500"));
        int free_binaries = 0;
        for (int col : build.program.binary_columns())
            if (build.program.columns[static_cast<size_t>(col)].lower <
                build.program.columns[static_cast<size_t>(col)].upper)
                ++free_binaries;
        nlohmann::json doc;
        doc["instance"] = "auto14";
        doc["policy"] = "1:500";
        doc["rows"] = build.program.num_rows();
        doc["columns"] = build.program.num_columns();
        doc["binary_columns"] = static_cast<int>(build.program.binary_columns().size());
        doc["free_binary_columns"] = free_binaries;
        write_text_atomic(golden + "/auto14_model_manifest.json", doc.dump(2) + "\n");
        std::cout << "auto14 model " << build.program.num_rows() << " rows, "
                  << build.program.num_columns() << " columns, " << free_binaries
                  << " free binaries\n";
    }

    std::cout << "goldens written to " << golden << "\n";
    return 0;
}
