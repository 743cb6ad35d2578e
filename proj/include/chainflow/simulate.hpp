#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "chainflow/instance.hpp"
#include "chainflow/mip_builder.hpp"

namespace chainflow {

// Counter-free splittable stream: every (replication, edge-product) pair gets
// its own generator derived by seed hashing, so draws never depend on
// execution order or worker count.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : key_(seed), state_(seed) {}

    RngStream substream(std::uint64_t salt) const { return RngStream(mix_seed(key_, salt)); }

    std::uint64_t next_bits() { return splitmix64(state_); }

    // uniform on (0, 1]
    double next_uniform_open() {
        return (static_cast<double>(next_bits() >> 11) + 1.0) * 0x1p-53;
    }
    // uniform on [0, 1)
    double next_uniform() { return static_cast<double>(next_bits() >> 11) * 0x1p-53; }

    // standard normal via Box-Muller; two fresh uniforms per draw
    double next_normal() {
        const double u1 = next_uniform_open();
        const double u2 = next_uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

  private:
    std::uint64_t key_;
    std::uint64_t state_;
};

struct LeadTimeModel {
    enum class Family { Lognormal, Deterministic };
    Family family = Family::Lognormal;
    double sigma = 0.3;  // log-scale standard deviation

    static LeadTimeModel lognormal(double sigma = 0.3) {
        if (sigma < 0.0) throw ChainflowError("lead-time sigma must be >= 0");
        return {Family::Lognormal, sigma};
    }
    static LeadTimeModel deterministic() { return {Family::Deterministic, 0.0}; }
};

// Log-scale location is ln(l), so the sampled distribution's median equals the
// plan's deterministic lead time.
inline double sample_lead_time(const LeadTimeModel& model, double lead, RngStream& stream) {
    if (model.family == LeadTimeModel::Family::Deterministic) return lead;
    if (!(lead > 0.0))
        throw ChainflowError("lognormal lead-time sampling requires l > 0, got " + fmt_num(lead));
    if (model.sigma == 0.0) return lead;
    return std::exp(std::log(lead) + model.sigma * stream.next_normal());
}

struct ReplicationResult {
    std::uint64_t seed = 0;
    std::vector<int> used_eps;             // edge-product positions, canonical order
    std::vector<double> realized_lead;     // per used_eps entry
    std::vector<double> realized_arrival;  // per used_eps entry
    std::vector<double> realized_ready;    // per dispatch pair
    std::vector<int> customer_eps;         // used deliveries into customer entities
    std::vector<double> lateness;          // per customer_eps entry, >= 0
    double total_lateness = 0.0;
};

// One replication: sample a lead time for every used edge-product, then
// propagate readiness and arrivals through the network in topological order.
// An entity dispatches once every required upstream flow has arrived.
inline ReplicationResult simulate_once(const SupplyChainInstance& inst, const VariableIndex& ix,
                                       const FlowPlan& plan, const LeadTimeModel& model,
                                       const RngStream& stream, std::uint64_t seed_tag = 0) {
    if (!inst.entity_graph_is_dag) throw ChainflowError("simulate_once: cycle detected");
    if (plan.edge_open.size() != ix.edge_products.size())
        throw ChainflowError("simulate_once: plan does not match the instance");

    ReplicationResult rep;
    rep.seed = seed_tag;
    std::vector<char> used(ix.edge_products.size(), 0);
    for (int ep : plan.used_edges) {
        used[static_cast<size_t>(ep)] = 1;
        rep.used_eps.push_back(ep);
    }
    std::sort(rep.used_eps.begin(), rep.used_eps.end());

    // One draw per used edge-product from its own substream.
    std::vector<double> lead(ix.edge_products.size(), 0.0);
    for (int ep : rep.used_eps) {
        const auto& epk = ix.edge_products[static_cast<size_t>(ep)];
        const Edge& e = inst.edges[static_cast<size_t>(epk.edge)];
        const double planned = map_get(e.lead_time, inst.product(epk.product).id);
        RngStream sub = stream.substream(static_cast<std::uint64_t>(ep));
        lead[static_cast<size_t>(ep)] = sample_lead_time(model, planned, sub);
        rep.realized_lead.push_back(lead[static_cast<size_t>(ep)]);
    }

    std::vector<double> arrival(ix.edge_products.size(), 0.0);
    rep.realized_ready.assign(ix.dispatch_pairs.size(), 0.0);
    for (int j : inst.topo_order) {
        for (int k : inst.dispatchable(j)) {
            const int dp = ix.find_dispatch(j, k);
            auto req_it = inst.requirements.find({j, k});
            if (req_it == inst.requirements.end()) continue;  // suppliers start at 0
            double ready = 0.0;
            for (int e : inst.in_edges[static_cast<size_t>(j)])
                for (int comp : req_it->second) {
                    const int ep = ix.find_ep(e, comp);
                    if (ep >= 0 && used[static_cast<size_t>(ep)])
                        ready = std::max(ready, arrival[static_cast<size_t>(ep)]);
                }
            rep.realized_ready[static_cast<size_t>(dp)] = ready;
        }
        for (int e : inst.out_edges[static_cast<size_t>(j)])
            for (int k : inst.edge_products[static_cast<size_t>(e)]) {
                const int ep = ix.find_ep(e, k);
                if (ep < 0 || !used[static_cast<size_t>(ep)]) continue;
                arrival[static_cast<size_t>(ep)] =
                    rep.realized_ready[static_cast<size_t>(ix.find_dispatch(j, k))] +
                    lead[static_cast<size_t>(ep)];
            }
    }
    for (int ep : rep.used_eps) rep.realized_arrival.push_back(arrival[static_cast<size_t>(ep)]);

    // Delivery lateness of flows into customers; no deadline means on time.
    for (int ep : rep.used_eps) {
        const auto& epk = ix.edge_products[static_cast<size_t>(ep)];
        const int to = inst.find_entity(inst.edges[static_cast<size_t>(epk.edge)].to);
        if (inst.entity(to).kind != EntityKind::Customer) continue;
        const auto due = inst.due_time(to, epk.product);
        const double late = due ? std::max(0.0, arrival[static_cast<size_t>(ep)] - *due) : 0.0;
        rep.customer_eps.push_back(ep);
        rep.lateness.push_back(late);
        rep.total_lateness += late;
    }
    return rep;
}

struct CustomerFlowStat {
    int ep = -1;
    double mean = 0.0;
    double stddev = 0.0;  // population
    double on_time_fraction = 0.0;
    std::vector<long> histogram;  // 1-day bins, bin b = floor(lateness)
};

struct SimulationReport {
    int replications = 0;
    std::uint64_t master_seed = 0;
    double sigma = 0.0;
    std::vector<int> customer_eps;
    std::vector<std::vector<double>> lateness;  // [replication][flow]
    std::vector<double> rep_total;
    std::vector<std::uint64_t> rep_seed;
    std::vector<CustomerFlowStat> stats;  // aligned to customer_eps
    double overall_mean = 0.0;
    double overall_std = 0.0;

    void compute_aggregates() {
        const size_t flows = customer_eps.size();
        stats.assign(flows, {});
        double sum_all = 0.0, sq_all = 0.0;
        long count_all = 0;
        for (size_t f = 0; f < flows; ++f) {
            CustomerFlowStat& s = stats[f];
            s.ep = customer_eps[f];
            double sum = 0.0, sq = 0.0;
            long on_time = 0;
            for (const auto& row : lateness) {
                const double v = row[f];
                sum += v;
                sq += v * v;
                if (v <= 0.0) ++on_time;
                const size_t bin = static_cast<size_t>(std::floor(v));
                if (s.histogram.size() <= bin) s.histogram.resize(bin + 1, 0);
                ++s.histogram[bin];
            }
            const double n = static_cast<double>(lateness.size());
            s.mean = n > 0 ? sum / n : 0.0;
            s.stddev = n > 0 ? std::sqrt(std::max(0.0, sq / n - s.mean * s.mean)) : 0.0;
            s.on_time_fraction = n > 0 ? static_cast<double>(on_time) / n : 0.0;
            sum_all += sum;
            sq_all += sq;
            count_all += static_cast<long>(lateness.size());
        }
        overall_mean = count_all > 0 ? sum_all / static_cast<double>(count_all) : 0.0;
        overall_std = count_all > 0
                          ? std::sqrt(std::max(0.0, sq_all / static_cast<double>(count_all) -
                                                        overall_mean * overall_mean))
                          : 0.0;
    }
};

// Runs n independently seeded replications. Each replication's stream is
// derived from (master_seed, index), so any worker count produces the same
// report.
inline SimulationReport run_replications(const SupplyChainInstance& inst, const VariableIndex& ix,
                                         const FlowPlan& plan, const LeadTimeModel& model, int n,
                                         std::uint64_t master_seed, int workers = 1) {
    if (n < 1) throw ChainflowError("run_replications: n must be >= 1");
    if (workers < 1) workers = 1;

    SimulationReport report;
    report.replications = n;
    report.master_seed = master_seed;
    report.sigma = model.family == LeadTimeModel::Family::Lognormal ? model.sigma : 0.0;

    // Flow layout comes from one dry pass so every replication row aligns.
    {
        RngStream probe(mix_seed(master_seed, 0));
        const ReplicationResult first =
            simulate_once(inst, ix, plan, LeadTimeModel::deterministic(), probe, 0);
        report.customer_eps = first.customer_eps;
    }

    report.lateness.assign(static_cast<size_t>(n), {});
    report.rep_total.assign(static_cast<size_t>(n), 0.0);
    report.rep_seed.assign(static_cast<size_t>(n), 0);

    auto run_range = [&](int worker) {
        for (int r = worker; r < n; r += workers) {
            const std::uint64_t seed = mix_seed(master_seed, static_cast<std::uint64_t>(r));
            RngStream stream(seed);
            const ReplicationResult rep = simulate_once(inst, ix, plan, model, stream, seed);
            report.lateness[static_cast<size_t>(r)] = rep.lateness;
            report.rep_total[static_cast<size_t>(r)] = rep.total_lateness;
            report.rep_seed[static_cast<size_t>(r)] = rep.seed;
        }
    };
    if (workers == 1) {
        run_range(0);
    } else {
        std::vector<std::thread> pool;
        for (int wkr = 0; wkr < workers; ++wkr) pool.emplace_back(run_range, wkr);
        for (auto& th : pool) th.join();
    }
    report.compute_aggregates();
    return report;
}

// ---- CSV export (fixed headers) ----

inline std::string replication_csv(const SupplyChainInstance& inst, const VariableIndex& ix,
                                   const SimulationReport& report) {
    std::string out = "replication,customer,product,lateness\n";
    for (size_t r = 0; r < report.lateness.size(); ++r)
        for (size_t f = 0; f < report.customer_eps.size(); ++f) {
            const auto& epk = ix.edge_products[static_cast<size_t>(report.customer_eps[f])];
            out += std::to_string(r) + "," + inst.edges[static_cast<size_t>(epk.edge)].to + "," +
                   inst.product(epk.product).id + "," + fmt_num(report.lateness[r][f]) + "\n";
        }
    return out;
}

inline std::string aggregate_csv(const SupplyChainInstance& inst, const VariableIndex& ix,
                                 const SimulationReport& report) {
    std::string out = "customer,product,mean,std,on_time_fraction\n";
    for (const auto& s : report.stats) {
        const auto& epk = ix.edge_products[static_cast<size_t>(s.ep)];
        out += inst.edges[static_cast<size_t>(epk.edge)].to + "," + inst.product(epk.product).id +
               "," + fmt_num(s.mean) + "," + fmt_num(s.stddev) + "," +
               fmt_num(s.on_time_fraction) + "\n";
    }
    return out;
}

inline std::string histogram_data(const SupplyChainInstance& inst, const VariableIndex& ix,
                                  const SimulationReport& report) {
    std::string out = "customer,product,bin,count\n";
    for (const auto& s : report.stats) {
        const auto& epk = ix.edge_products[static_cast<size_t>(s.ep)];
        for (size_t b = 0; b < s.histogram.size(); ++b)
            out += inst.edges[static_cast<size_t>(epk.edge)].to + "," +
                   inst.product(epk.product).id + "," + std::to_string(b) + "," +
                   std::to_string(s.histogram[b]) + "\n";
    }
    return out;
}

}  // namespace chainflow
