#include "gossipmon/compare.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "gossipmon/errors.hpp"

namespace gossipmon {

std::vector<MetricsReport> compare_schemes(const Scenario& base, std::span<const Scheme> schemes,
                                           std::uint32_t seeds, const Runner& runner) {
  if (schemes.empty()) throw ConfigError("schemes", "at least one scheme is required");
  if (seeds == 0) throw ConfigError("seeds", "must be at least 1");

  std::vector<MetricsReport> out;
  out.reserve(schemes.size() * seeds);
  for (std::uint32_t i = 0; i < seeds; ++i) {
    const std::size_t first = out.size();
    std::optional<std::uint64_t> central_total;
    for (Scheme scheme : schemes) {
      Scenario sc = base;
      sc.scheme = scheme;
      sc.seed = base.seed + i;
      out.push_back(runner ? runner(sc).report : run(sc).report);
      if (scheme == Scheme::central) central_total = out.back().total_messages();
    }
    if (!central_total || *central_total == 0) continue;
    for (std::size_t j = first; j < out.size(); ++j) {
      if (out[j].scheme != Scheme::central) {
        out[j].overhead_ratio = overhead_ratio(out[j].total_messages(), *central_total);
      }
    }
  }
  return out;
}

std::vector<RatioSummary> summarize_ratios(std::span<const MetricsReport> reports) {
  std::vector<RatioSummary> out;
  for (const auto& r : reports) {
    if (!r.overhead_ratio) continue;
    const double v = *r.overhead_ratio;
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const RatioSummary& s) { return s.scheme == r.scheme; });
    if (it == out.end()) {
      out.push_back(RatioSummary{r.scheme, 1, v, v, v});
      continue;
    }
    it->mean = (it->mean * static_cast<double>(it->runs) + v) / static_cast<double>(it->runs + 1);
    ++it->runs;
    it->min = std::min(it->min, v);
    it->max = std::max(it->max, v);
  }
  return out;
}

namespace {

std::string csv_field(std::string_view v) {
  if (v.find_first_of(",\"\n") == std::string_view::npos) return std::string(v);
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::string compare_csv_rows(std::span<const MetricsReport> reports, std::string_view param,
                             std::string_view value) {
  std::ostringstream os;
  for (const auto& r : reports) {
    os << csv_field(param) << ',' << csv_field(value) << ',' << r.seed << ',' << to_string(r.scheme) << ','
       << r.population << ',' << r.groups << ',' << r.regions << ',' << r.rounds << ','
       << r.total_messages() << ',';
    if (r.convergence_round) os << *r.convergence_round;
    os << ',';
    if (r.overhead_ratio) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", *r.overhead_ratio);
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

std::vector<Scheme> parse_scheme_list(std::string_view text) {
  std::vector<Scheme> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = text.substr(0, comma);
    if (item.empty()) throw ConfigError("schemes", "empty entry in scheme list");
    try {
      out.push_back(parse_scheme(item));
    } catch (const InvalidInput& e) {
      throw ConfigError("schemes", e.what());
    }
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError("schemes", "at least one scheme is required");
  return out;
}

}  // namespace gossipmon
