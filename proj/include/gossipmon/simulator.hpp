#pragma once

#include <utility>
#include <vector>

#include "gossipmon/metrics.hpp"
#include "gossipmon/protocol.hpp"
#include "gossipmon/scenario.hpp"
#include "gossipmon/topology.hpp"
#include "gossipmon/trace.hpp"

namespace gossipmon {

struct RunOptions {
  // Every trace event goes to each sink, in order.
  std::vector<TraceSink*> sinks;
  bool keep_snapshots{false};
};

struct RunResult {
  MetricsReport report;
  Topology topology;  // as it stands at the end of the run
  std::vector<CoverageSnapshot> snapshots;  // one per round, when kept
  std::vector<NodeState> final_states;  // indexed by VmId; empty for central
  std::vector<ResourceUsage> final_usage;  // latest workload value per VM
  PerKindCount in_flight{};  // messages still travelling at the end
};

/// Runs one scenario to completion.
///
/// Events run in (tick, scheduling order). Each VM's timer fires once per
/// round at a per-VM phase offset: it steps the workload, samples, starts an
/// intra-group rumor and, on inter-group / inter-cloud rounds, runs those
/// timers too. A send is dropped or scheduled for delivery at
/// tick + max(1, round(latency)) when it is made. Churn events apply at the
/// start of their tick. All randomness comes from one generator seeded with
/// scenario.seed. Throws ConfigError for an invalid scenario.
RunResult run(const Scenario& scenario, const RunOptions& options = {});

// Convenience wrapper returning the full in-memory trace.
std::pair<MetricsReport, EventTrace> run_traced(const Scenario& scenario);

}  // namespace gossipmon
