#include "gossipmon/report_io.hpp"

#include <fstream>
#include <sstream>

#include "gossipmon/errors.hpp"

namespace gossipmon {

namespace {

using nlohmann::ordered_json;

void csv_row(std::ostream& out, const MetricsReport& r, const std::string& round, const RoundCounts& c) {
  out << to_string(r.scheme) << ',' << r.population << ',' << r.groups << ',' << r.regions << ','
      << round << ',' << c.intra_group.sent() << ',' << c.inter_group.sent() << ','
      << c.inter_cloud.sent() << ',' << c.dropped() << ',' << c.total() << '\n';
}

ordered_json tier_json(const TierCounts& t) {
  return {{"initiated", t.initiated}, {"forwarded", t.forwarded}, {"dropped", t.dropped}};
}

ordered_json counts_json(const RoundCounts& c) {
  ordered_json j;
  j["intra_group"] = tier_json(c.intra_group);
  j["inter_group"] = tier_json(c.inter_group);
  j["inter_cloud"] = tier_json(c.inter_cloud);
  j["dropped"] = c.dropped();
  j["total"] = c.total();
  return j;
}

}  // namespace

std::string report_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (std::size_t i = 0; i < report.per_round.size(); ++i) {
    csv_row(out, report, std::to_string(i + 1), report.per_round[i]);
  }
  csv_row(out, report, "TOTAL", report.totals());
  return out.str();
}

ordered_json report_json(const MetricsReport& report) {
  ordered_json j;
  j["scheme"] = std::string(to_string(report.scheme));
  j["population"] = report.population;
  j["groups"] = report.groups;
  j["regions"] = report.regions;
  j["rounds"] = report.rounds;
  j["seed"] = report.seed;
  ordered_json rounds = ordered_json::array();
  for (std::size_t i = 0; i < report.per_round.size(); ++i) {
    ordered_json row;
    row["round"] = i + 1;
    row.update(counts_json(report.per_round[i]));
    rounds.push_back(std::move(row));
  }
  j["per_round"] = std::move(rounds);
  j["totals"] = counts_json(report.totals());
  j["total_messages"] = report.total_messages();
  j["convergence_round"] = report.convergence_round ? ordered_json(*report.convergence_round) : ordered_json();
  j["overhead_ratio"] = report.overhead_ratio ? ordered_json(*report.overhead_ratio) : ordered_json();
  return j;
}

void emit_report(const MetricsReport& report, ReportFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  if (format == ReportFormat::csv) {
    out << report_csv(report);
  } else {
    out << report_json(report).dump(2) << '\n';
  }
  out.flush();
  if (!out) throw IoError(path.string(), "write failed");
}

ordered_json snapshots_json(std::span<const CoverageSnapshot> snapshots) {
  ordered_json out = ordered_json::array();
  for (const auto& s : snapshots) {
    ordered_json j;
    j["round"] = s.round;
    ordered_json groups = ordered_json::array();
    for (const auto& per_region : s.required_groups) {
      ordered_json ids = ordered_json::array();
      for (GroupId g : per_region) ids.push_back(g.value);
      groups.push_back(std::move(ids));
    }
    j["required_groups"] = std::move(groups);
    ordered_json regions = ordered_json::array();
    for (RegionId r : s.required_regions) regions.push_back(r.value);
    j["required_regions"] = std::move(regions);
    ordered_json alive = ordered_json::array();
    for (VmId v : s.alive) alive.push_back(v.value);
    j["alive"] = std::move(alive);
    ordered_json nodes = ordered_json::array();
    for (const auto& n : s.nodes) {
      ordered_json node;
      node["id"] = n.id.value;
      node["region"] = n.region.value;
      ordered_json gk = ordered_json::array();
      for (GroupId g : n.group_keys) gk.push_back(g.value);
      node["group_keys"] = std::move(gk);
      ordered_json rk = ordered_json::array();
      for (RegionId r : n.region_keys) rk.push_back(r.value);
      node["region_keys"] = std::move(rk);
      ordered_json origins = ordered_json::array();
      for (VmId v : n.origins) origins.push_back(v.value);
      node["origins"] = std::move(origins);
      nodes.push_back(std::move(node));
    }
    j["nodes"] = std::move(nodes);
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace gossipmon
