#include <doctest.h>

#include <json.hpp>

#include "support.hpp"

using namespace chainflow;
using testsupport::data_path;
using testsupport::golden_path;

namespace {

FlowPlan solve_plan(const SupplyChainInstance& inst, const LatenessPolicy& policy) {
    const BuildResult build = build_model(inst, policy);
    const SolveReport rep = solve_milp(build.program);
    REQUIRE(rep.status == MilpStatus::Optimal);
    return canonicalize_times(inst, policy, build.index,
                              extract_solution(build.program, build.index, rep.assignment));
}

// Independent replay: recomputes arrivals and readiness from the REALIZED
// lead times of a replication record with memoized recursion instead of the
// engine's topological sweep.
struct Replay {
    const SupplyChainInstance& inst;
    const VariableIndex& ix;
    const std::vector<char>& used;
    const std::vector<double>& lead;
    std::map<std::pair<int, int>, double> ready_memo;

    double ready(int entity, int product) {
        if (inst.entity(entity).kind == EntityKind::Supplier) return 0.0;
        auto key = std::make_pair(entity, product);
        auto hit = ready_memo.find(key);
        if (hit != ready_memo.end()) return hit->second;
        double value = 0.0;
        auto req_it = inst.requirements.find(key);
        if (req_it != inst.requirements.end()) {
            for (int e : inst.in_edges[static_cast<size_t>(entity)])
                for (int comp : req_it->second) {
                    const int ep = ix.find_ep(e, comp);
                    if (ep >= 0 && used[static_cast<size_t>(ep)])
                        value = std::max(value, arrival(ep));
                }
        }
        ready_memo[key] = value;
        return value;
    }
    double arrival(int ep) {
        const auto& epk = ix.edge_products[static_cast<size_t>(ep)];
        const int from = inst.find_entity(inst.edge(epk.edge).from);
        return ready(from, epk.product) + lead[static_cast<size_t>(ep)];
    }
};

}  // namespace

TEST_CASE("lead-time sampling honors the family and the degenerate sigma") {
    RngStream stream(123);
    RngStream sub = stream.substream(1);
    CHECK(sample_lead_time(LeadTimeModel::deterministic(), 7.0, sub) == 7.0);
    CHECK(sample_lead_time(LeadTimeModel::lognormal(0.0), 5.0, sub) == 5.0);
    CHECK_THROWS_AS(sample_lead_time(LeadTimeModel::lognormal(0.3), 0.0, sub), ChainflowError);
    CHECK_THROWS_AS(LeadTimeModel::lognormal(-0.1), ChainflowError);
}

TEST_CASE("sampled medians sit on the deterministic lead time") {
    const LeadTimeModel model = LeadTimeModel::lognormal(0.3);
    for (double lead : {1.0, 5.0, 20.0}) {
        RngStream stream(991 + static_cast<std::uint64_t>(lead));
        std::vector<double> samples;
        samples.reserve(100000);
        for (int i = 0; i < 100000; ++i) {
            RngStream sub = stream.substream(static_cast<std::uint64_t>(i));
            samples.push_back(sample_lead_time(model, lead, sub));
        }
        std::nth_element(samples.begin(), samples.begin() + 50000, samples.end());
        const double median = samples[50000];
        CHECK(std::fabs(median - lead) <= 0.02 * lead);
    }
}

TEST_CASE("sigma zero reproduces the plan's arrival variables exactly") {
    const SupplyChainInstance desk = load_instance(data_path("desk7.json"));
    const VariableIndex ix = build_variable_index(desk);
    const FlowPlan plan = solve_plan(desk, lateness_policy_from_string("1:0"));
    RngStream stream(7);
    const ReplicationResult rep =
        simulate_once(desk, ix, plan, LeadTimeModel::lognormal(0.0), stream);
    REQUIRE(!rep.used_eps.empty());
    for (size_t i = 0; i < rep.used_eps.size(); ++i) {
        const int ep = rep.used_eps[i];
        CHECK(std::fabs(rep.realized_arrival[i] - plan.arrival[static_cast<size_t>(ep)]) <= 1e-9);
    }
    for (size_t dp = 0; dp < ix.dispatch_pairs.size(); ++dp)
        CHECK(std::fabs(rep.realized_ready[dp] - plan.ready[dp]) <= 1e-9);
}

TEST_CASE("an assembler waits for its slowest required component") {
    SupplyChainInstance inst;
    inst.products = {{"left", "Left"}, {"right", "Right"}, {"pair", "Pair"}};
    inst.bom = {{"left", "pair", 1.0}, {"right", "pair", 1.0}};
    Entity s1, s2, a, c;
    s1.id = "S1";
    s1.kind = EntityKind::Supplier;
    s1.production_capacity = 10;
    s1.production_cost["left"] = 1.0;
    s2.id = "S2";
    s2.kind = EntityKind::Supplier;
    s2.production_capacity = 10;
    s2.production_cost["right"] = 1.0;
    a.id = "A";
    a.kind = EntityKind::Oem;
    a.production_capacity = 10;
    a.production_cost["pair"] = 1.0;
    c.id = "C";
    c.kind = EntityKind::Customer;
    c.demand["pair"] = 2.0;
    c.shortage_penalty["pair"] = 100.0;
    inst.entities = {s1, s2, a, c};
    Edge e1, e2, e3;
    e1.from = "S1";
    e1.to = "A";
    e1.capacity = 5;
    e1.unit_cost["left"] = 1;
    e1.lead_time["left"] = 3.0;
    e2.from = "S2";
    e2.to = "A";
    e2.capacity = 5;
    e2.unit_cost["right"] = 1;
    e2.lead_time["right"] = 8.0;
    e3.from = "A";
    e3.to = "C";
    e3.capacity = 5;
    e3.unit_cost["pair"] = 1;
    e3.lead_time["pair"] = 1.0;
    inst.edges = {e1, e2, e3};
    inst.finalize();
    REQUIRE(validate(inst).empty());

    const VariableIndex ix = build_variable_index(inst);
    const FlowPlan plan = solve_plan(inst, LatenessPolicy::none());
    RngStream stream(3);
    const ReplicationResult rep =
        simulate_once(inst, ix, plan, LeadTimeModel::deterministic(), stream);
    const int dp = ix.find_dispatch(inst.find_entity("A"), inst.find_product("pair"));
    REQUIRE(dp >= 0);
    CHECK(rep.realized_ready[static_cast<size_t>(dp)] == doctest::Approx(8.0));
}

TEST_CASE("seeded replication matches the frozen golden record") {
    const SupplyChainInstance desk = load_instance(data_path("desk7.json"));
    const VariableIndex ix = build_variable_index(desk);
    const BuildResult build = build_model(desk, LatenessPolicy::none());
    const SolveReport solved = brute_force_milp(build.program, 20);
    REQUIRE(solved.status == MilpStatus::Optimal);
    const FlowPlan plan = canonicalize_times(
        desk, LatenessPolicy::none(), build.index,
        extract_solution(build.program, build.index, solved.assignment));

    const std::uint64_t seed = mix_seed(42, 0);
    RngStream stream(seed);
    const ReplicationResult rep =
        simulate_once(desk, ix, plan, LeadTimeModel::lognormal(0.3), stream, seed);

    const nlohmann::json want =
        nlohmann::json::parse(read_text_file(golden_path("desk_sim_seed42.json")));
    REQUIRE(want.at("edges").size() == rep.used_eps.size());
    for (size_t i = 0; i < rep.used_eps.size(); ++i) {
        CHECK(fmt_num_exact(rep.realized_lead[i]) ==
              want.at("edges")[i].at("lead").get<std::string>());
        CHECK(fmt_num_exact(rep.realized_arrival[i]) ==
              want.at("edges")[i].at("arrival").get<std::string>());
    }
    REQUIRE(want.at("lateness").size() == rep.lateness.size());
    for (size_t f = 0; f < rep.lateness.size(); ++f)
        CHECK(fmt_num_exact(rep.lateness[f]) == want.at("lateness")[f].get<std::string>());

    // independent replay from the realized lead times
    std::vector<char> used(ix.edge_products.size(), 0);
    std::vector<double> lead(ix.edge_products.size(), 0.0);
    for (size_t i = 0; i < rep.used_eps.size(); ++i) {
        used[static_cast<size_t>(rep.used_eps[i])] = 1;
        lead[static_cast<size_t>(rep.used_eps[i])] = rep.realized_lead[i];
    }
    Replay replay{desk, ix, used, lead, {}};
    for (size_t i = 0; i < rep.used_eps.size(); ++i)
        CHECK(replay.arrival(rep.used_eps[i]) == doctest::Approx(rep.realized_arrival[i]).epsilon(1e-12));
}

TEST_CASE("replication reports are independent of worker count and order") {
    const SupplyChainInstance desk = load_instance(data_path("desk7.json"));
    const VariableIndex ix = build_variable_index(desk);
    const FlowPlan plan = solve_plan(desk, LatenessPolicy::none());
    const LeadTimeModel model = LeadTimeModel::lognormal(0.3);
    const SimulationReport one = run_replications(desk, ix, plan, model, 40, 99, 1);
    const SimulationReport three = run_replications(desk, ix, plan, model, 40, 99, 3);
    CHECK(replication_csv(desk, ix, one) == replication_csv(desk, ix, three));
    CHECK(aggregate_csv(desk, ix, one) == aggregate_csv(desk, ix, three));
}

TEST_CASE("single-replication aggregates equal that replication") {
    const SupplyChainInstance desk = load_instance(data_path("desk7.json"));
    const VariableIndex ix = build_variable_index(desk);
    const FlowPlan plan = solve_plan(desk, LatenessPolicy::none());
    const SimulationReport rep = run_replications(desk, ix, plan, LeadTimeModel::lognormal(0.3),
                                                  1, 2024, 1);
    REQUIRE(rep.lateness.size() == 1);
    for (size_t f = 0; f < rep.stats.size(); ++f) {
        CHECK(rep.stats[f].mean == doctest::Approx(rep.lateness[0][f]));
        CHECK(rep.stats[f].stddev == doctest::Approx(0.0));
    }
    CHECK_THROWS_AS(run_replications(desk, ix, plan, LeadTimeModel::lognormal(0.3), 0, 1, 1),
                    ChainflowError);
}

TEST_CASE("three hundred replications reproduce the frozen mean exactly") {
    const SupplyChainInstance desk = load_instance(data_path("desk7.json"));
    const VariableIndex ix = build_variable_index(desk);
    const BuildResult build = build_model(desk, LatenessPolicy::none());
    const SolveReport solved = brute_force_milp(build.program, 20);
    const FlowPlan plan = canonicalize_times(
        desk, LatenessPolicy::none(), build.index,
        extract_solution(build.program, build.index, solved.assignment));
    const SimulationReport rep =
        run_replications(desk, ix, plan, LeadTimeModel::lognormal(0.3), 300, 42, 1);
    const std::string want = read_text_file(golden_path("desk_sim_300_mean.txt"));
    CHECK(fmt_num_exact(rep.overall_mean) + "\n" == want);
}

TEST_CASE("stretching one realized lead time never speeds anything up") {
    const SupplyChainInstance desk = load_instance(data_path("desk7.json"));
    const VariableIndex ix = build_variable_index(desk);
    const FlowPlan plan = solve_plan(desk, lateness_policy_from_string("1:0"));
    RngStream stream(5);
    const ReplicationResult before =
        simulate_once(desk, ix, plan, LeadTimeModel::deterministic(), stream);

    for (int target : plan.used_edges) {
        SupplyChainInstance bumped = desk;
        const auto& epk = ix.edge_products[static_cast<size_t>(target)];
        bumped.edges[static_cast<size_t>(epk.edge)]
            .lead_time[desk.product(epk.product).id] += 1.5;
        bumped.finalize();
        RngStream stream2(5);
        const ReplicationResult after =
            simulate_once(bumped, ix, plan, LeadTimeModel::deterministic(), stream2);
        for (size_t i = 0; i < before.used_eps.size(); ++i)
            CHECK(after.realized_arrival[i] >= before.realized_arrival[i] - 1e-12);
        for (size_t dp = 0; dp < before.realized_ready.size(); ++dp)
            CHECK(after.realized_ready[dp] >= before.realized_ready[dp] - 1e-12);
        for (size_t f = 0; f < before.lateness.size(); ++f)
            CHECK(after.lateness[f] >= before.lateness[f] - 1e-12);
    }
}

TEST_CASE("report aggregates are recomputable from the stored matrix") {
    const SupplyChainInstance desk = load_instance(data_path("desk7.json"));
    const VariableIndex ix = build_variable_index(desk);
    const FlowPlan plan = solve_plan(desk, LatenessPolicy::none());
    const SimulationReport rep =
        run_replications(desk, ix, plan, LeadTimeModel::lognormal(0.3), 60, 31, 1);
    for (size_t f = 0; f < rep.stats.size(); ++f) {
        double sum = 0.0, sq = 0.0;
        long on_time = 0;
        for (const auto& row : rep.lateness) {
            sum += row[f];
            sq += row[f] * row[f];
            if (row[f] <= 0.0) ++on_time;
        }
        const double n = static_cast<double>(rep.lateness.size());
        CHECK(rep.stats[f].mean == doctest::Approx(sum / n).epsilon(1e-12));
        CHECK(rep.stats[f].stddev ==
              doctest::Approx(std::sqrt(std::max(0.0, sq / n - (sum / n) * (sum / n))))
                  .epsilon(1e-12));
        CHECK(rep.stats[f].on_time_fraction == doctest::Approx(on_time / n));
        long hist_total = 0;
        for (long c : rep.stats[f].histogram) hist_total += c;
        CHECK(hist_total == static_cast<long>(rep.lateness.size()));
    }
    for (size_t r = 0; r < rep.lateness.size(); ++r) {
        double total = 0.0;
        for (double v : rep.lateness[r]) total += v;
        CHECK(rep.rep_total[r] == doctest::Approx(total).epsilon(1e-12));
    }
}

TEST_CASE("distinct replication and edge streams draw distinct values") {
    RngStream a = RngStream(mix_seed(42, 1)).substream(0);
    RngStream b = RngStream(mix_seed(42, 1)).substream(1);
    RngStream c = RngStream(mix_seed(42, 2)).substream(0);
    const double va = a.next_normal(), vb = b.next_normal(), vc = c.next_normal();
    CHECK(va != vb);
    CHECK(va != vc);
    CHECK(vb != vc);
}
