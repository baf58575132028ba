#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gossipmon/metrics.hpp"
#include "gossipmon/scenario.hpp"
#include "gossipmon/simulator.hpp"

namespace gossipmon {

using Runner = std::function<RunResult(const Scenario&)>;

/// Runs every scheme on seeds base.seed, base.seed + 1, ... (`seeds` of
/// them). Reports come back seed-major in the order of `schemes`. When the
/// central scheme is among them, every other report of the same seed gets
/// its overhead_ratio against it.
std::vector<MetricsReport> compare_schemes(const Scenario& base, std::span<const Scheme> schemes,
                                           std::uint32_t seeds, const Runner& runner = {});

struct RatioSummary {
  Scheme scheme{Scheme::layered};
  std::size_t runs{0};
  double mean{0.0};
  double min{0.0};
  double max{0.0};

  // Largest distance from the mean, in percentage points.
  double spread() const noexcept { return std::max(max - mean, mean - min); }
};

// One entry per scheme that carries overhead ratios, in first-seen order.
std::vector<RatioSummary> summarize_ratios(std::span<const MetricsReport> reports);

inline constexpr const char* kCompareHeader =
    "param,value,seed,scheme,population,groups,regions,rounds,total_messages,convergence_round,"
    "overhead_ratio";

// Rows without the header; empty convergence/ratio cells mean "none".
std::string compare_csv_rows(std::span<const MetricsReport> reports, std::string_view param = {},
                             std::string_view value = {});

std::vector<Scheme> parse_scheme_list(std::string_view text);

}  // namespace gossipmon
