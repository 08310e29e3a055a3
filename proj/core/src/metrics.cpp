#include "ecasim/metrics.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace ecasim::metrics {

double
ThroughputMbps (const PerNodeStats &stats, double simSeconds)
{
  if (!(simSeconds > 0.0))
    {
      throw std::invalid_argument ("ThroughputMbps: duration must be positive");
    }
  return static_cast<double> (stats.deliveredBytes) * 8.0 / (simSeconds * 1e6);
}

double
FailureFraction (const PerNodeStats &stats)
{
  if (stats.attempts == 0)
    {
      return 0.0;
    }
  return static_cast<double> (stats.failures) / static_cast<double> (stats.attempts);
}

double
Jfi (std::span<const double> values)
{
  if (values.empty ())
    {
      throw std::invalid_argument ("Jfi: empty list");
    }
  double sum = 0.0;
  double sq = 0.0;
  for (double v : values)
    {
      if (v < 0.0 || !std::isfinite (v))
        {
          throw std::invalid_argument ("Jfi: values must be finite and non-negative");
        }
      sum += v;
      sq += v * v;
    }
  if (sq == 0.0)
    {
      return 1.0;
    }
  return sum * sum / (static_cast<double> (values.size ()) * sq);
}

const char *
GroupingName (Grouping g)
{
  switch (g)
    {
    case Grouping::PerStation:
      return "per_station";
    case Grouping::PerWlan:
      return "per_wlan";
    case Grouping::PerFloor:
      return "per_floor";
    case Grouping::Overall:
      return "overall";
    }
  return "?";
}

namespace {

int
GroupKey (const NodeSpec &n, Grouping g)
{
  switch (g)
    {
    case Grouping::PerStation:
      return static_cast<int> (n.id);
    case Grouping::PerWlan:
      return n.wlan;
    case Grouping::PerFloor:
      if (!n.floor)
        {
          throw ConfigError ("per-floor grouping needs a building topology");
        }
      return *n.floor;
    case Grouping::Overall:
      return 0;
    }
  return 0;
}

} // namespace

std::vector<GroupRow>
Aggregate (const engine::RunResult &run, Grouping grouping)
{
  std::map<int, std::vector<NodeId>> members;
  for (const NodeSpec &n : run.nodes)
    {
      if (n.role == Role::Station)
        {
          members[GroupKey (n, grouping)].push_back (n.id);
        }
    }
  std::vector<GroupRow> rows;
  rows.reserve (members.size ());
  std::vector<double> tputs;
  for (const auto &[key, ids] : members)
    {
      GroupRow row;
      row.group = key;
      row.members = static_cast<int> (ids.size ());
      tputs.clear ();
      for (NodeId id : ids)
        {
          const PerNodeStats &s = run.stats.at (id);
          row.totals += s;
          tputs.push_back (ThroughputMbps (s, run.simSeconds));
        }
      row.throughputMbps = ThroughputMbps (row.totals, run.simSeconds);
      row.failureFraction = FailureFraction (row.totals);
      row.attempts = static_cast<double> (row.totals.attempts);
      row.jfi = Jfi (tputs);
      rows.push_back (row);
    }
  return rows;
}

Summary
Summarize (std::span<const double> values)
{
  Summary s;
  if (values.empty ())
    {
      return s;
    }
  double sum = 0.0;
  for (double v : values)
    {
      sum += v;
    }
  s.mean = sum / static_cast<double> (values.size ());
  if (values.size () >= 2)
    {
      double ss = 0.0;
      for (double v : values)
        {
          ss += (v - s.mean) * (v - s.mean);
        }
      s.stddev = std::sqrt (ss / static_cast<double> (values.size () - 1));
    }
  return s;
}

std::vector<MultiRunRow>
AggregateRuns (std::span<const engine::RunResult> runs, Grouping grouping)
{
  std::vector<std::vector<GroupRow>> perRun;
  perRun.reserve (runs.size ());
  for (const engine::RunResult &r : runs)
    {
      perRun.push_back (Aggregate (r, grouping));
      if (perRun.back ().size () != perRun.front ().size ())
        {
          throw std::invalid_argument ("AggregateRuns: runs have different groups");
        }
    }
  std::vector<MultiRunRow> out;
  if (perRun.empty ())
    {
      return out;
    }
  std::vector<double> t, f, a, j;
  for (std::size_t g = 0; g < perRun.front ().size (); ++g)
    {
      t.clear ();
      f.clear ();
      a.clear ();
      j.clear ();
      const GroupRow &first = perRun.front ()[g];
      for (const auto &rows : perRun)
        {
          const GroupRow &r = rows[g];
          if (r.group != first.group)
            {
              throw std::invalid_argument ("AggregateRuns: runs have different groups");
            }
          t.push_back (r.throughputMbps);
          f.push_back (r.failureFraction);
          a.push_back (r.attempts);
          j.push_back (r.jfi);
        }
      out.push_back ({first.group, first.members, Summarize (t), Summarize (f), Summarize (a),
                      Summarize (j)});
    }
  return out;
}

} // namespace ecasim::metrics
