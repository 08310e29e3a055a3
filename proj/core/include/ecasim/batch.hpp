#ifndef ECASIM_BATCH_HPP
#define ECASIM_BATCH_HPP

#include "ecasim/building.hpp"
#include "ecasim/engine.hpp"
#include "ecasim/metrics.hpp"
#include "ecasim/scenarios.hpp"

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace ecasim::batch {

/// A run specification problem, reported with the key and the line it came
/// from (line 0 for command-line overrides and defaults).
class SpecError : public ConfigError
{
public:
  SpecError (const std::string &key, int line, const std::string &what);

  const std::string &Key () const { return m_key; }
  int Line () const { return m_line; }
  /// The message without the key and line prefix.
  const std::string &Detail () const { return m_detail; }

private:
  std::string m_key;
  int m_line;
  std::string m_detail;
};

enum class ScenarioKind
{
  SingleAp,
  ScenarioA,
  ScenarioB,
  Hew,
};

struct RunSpec
{
  ScenarioKind scenario = ScenarioKind::SingleAp;
  std::vector<mac::Protocol> protocols{mac::Protocol::Dcf ()};
  int iterations = 5;
  std::uint64_t baseSeed = 1;
  std::filesystem::path outputDir = "results";
  /// Stations per AP; more than one value runs a sweep.
  std::vector<int> nStations{10};
  int nAps = 3;
  double deltaXM = 15.0;
  double deltaM = 5.0;
  double radiusM = 5.0;
  /// Disc model for single_ap.
  bool ideal = true;
  /// Disc model for scenario_a.
  bool control = false;
  BuildingGeometry building;
  /// Propagation parameters used whenever the scenario is not ideal.
  channel::LogDistance propagation;
  scenarios::ChannelPolicy channels;
  std::filesystem::path channelMapFile;
  /// durationS, MAC/PHY parameters and thresholds. The channel model is
  /// chosen per scenario.
  engine::SimConfig sim;
  /// Applied to every protocol.
  bool fairShare = false;
  int workers = 1;

  /// Throws SpecError on a violated invariant.
  void Validate () const;
};

/// Key/value overrides in command-line order, e.g. {"cw_min", "32"}.
using Overrides = std::vector<std::pair<std::string, std::string>>;

/// Parses "key = value" lines ('#' starts a comment) on top of the defaults,
/// then applies the overrides. Unknown keys, unparsable values and invariant
/// violations throw SpecError.
RunSpec ParseSpec (std::istream &in, const Overrides &overrides = {});
RunSpec ParseSpecFile (const std::filesystem::path &path, const Overrides &overrides = {});

/// Applies one key (line 0). Throws SpecError.
void SetKey (RunSpec &spec, const std::string &key, const std::string &value);

/// Every key the parser accepts, in manifest order.
std::vector<std::string> SpecKeys ();

/// Parseable text holding every resolved key.
std::string FormatSpec (const RunSpec &spec);

std::string ScenarioName (ScenarioKind k);

/// Topology and channel model of one iteration.
scenarios::Scenario BuildScenario (const RunSpec &spec, int nStations, std::uint64_t seed);

/// Simulation configuration of one run.
engine::SimConfig BuildConfig (const RunSpec &spec, const scenarios::Scenario &scenario,
                               const mac::Protocol &protocol, std::uint64_t seed);

/// Multi-iteration aggregates of one (protocol, N) cell.
struct AggregateSet
{
  std::string protocol;
  int nStations = 0;
  std::map<metrics::Grouping, std::vector<metrics::MultiRunRow>> tables;
};

struct ExecuteResult
{
  int exitCode = 0;
  std::vector<std::filesystem::path> files;
  std::vector<AggregateSet> aggregates;
  std::string error;
};

/// Runs every (protocol, N, iteration) with seed = baseSeed + iteration and
/// writes raw/, aggregate_*.csv, plot_*.tsv and manifest.txt under
/// outputDir. On an I/O failure the manifest (if it can be written) is
/// marked incomplete and exitCode is nonzero.
ExecuteResult Execute (const RunSpec &spec);

/// Writes tab-separated plot series for the aggregates. Returns the files
/// written; none for an empty set.
std::vector<std::filesystem::path> EmitPlotData (const std::vector<AggregateSet> &aggregates,
                                                 const std::filesystem::path &dir);

} // namespace ecasim::batch

#endif
