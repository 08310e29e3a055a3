#ifndef ECASIM_METRICS_HPP
#define ECASIM_METRICS_HPP

#include "ecasim/engine.hpp"
#include "ecasim/stats.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ecasim::metrics {

/// Payload goodput: deliveredBytes * 8 / (seconds * 1e6).
double ThroughputMbps (const PerNodeStats &stats, double simSeconds);

/// failures / attempts, 0 when nothing was attempted.
double FailureFraction (const PerNodeStats &stats);

/// Jain's fairness index. All-zero input gives 1. Throws
/// std::invalid_argument on an empty list or a negative value.
double Jfi (std::span<const double> values);

enum class Grouping
{
  PerStation,
  PerWlan,
  PerFloor,
  Overall,
};

const char *GroupingName (Grouping g);

struct GroupRow
{
  /// Station id, WLAN index or floor index; 0 for Overall.
  int group = 0;
  int members = 0;
  PerNodeStats totals;
  double throughputMbps = 0.0;
  double failureFraction = 0.0;
  double attempts = 0.0;
  /// Over member station throughputs.
  double jfi = 1.0;
};

/// Sums station counters per group, in ascending group order. APs are not
/// members of any group. PerFloor throws ConfigError if a station has no
/// floor.
std::vector<GroupRow> Aggregate (const engine::RunResult &run, Grouping grouping);

struct Summary
{
  double mean = 0.0;
  /// Sample standard deviation; absent for fewer than two values.
  std::optional<double> stddev;
};

Summary Summarize (std::span<const double> values);

struct MultiRunRow
{
  int group = 0;
  int members = 0;
  Summary throughputMbps;
  Summary failureFraction;
  Summary attempts;
  Summary jfi;
};

/// Mean and sample std of each group's metrics across runs of the same
/// topology. Throws std::invalid_argument if the runs disagree on groups.
std::vector<MultiRunRow> AggregateRuns (std::span<const engine::RunResult> runs, Grouping grouping);

} // namespace ecasim::metrics

#endif
