#include "ecasim/batch.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

namespace ecasim::batch {

namespace fs = std::filesystem;

SpecError::SpecError (const std::string &key, int line, const std::string &what)
  : ConfigError ((line > 0 ? "line " + std::to_string (line) + ": " : std::string ()) + "key '"
                 + key + "': " + what),
    m_key (key),
    m_line (line),
    m_detail (what)
{
}

namespace {

class ValueError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

std::string
Trim (std::string_view s)
{
  const auto b = s.find_first_not_of (" \t\r\n");
  if (b == std::string_view::npos)
    {
      return {};
    }
  const auto e = s.find_last_not_of (" \t\r\n");
  return std::string (s.substr (b, e - b + 1));
}

std::vector<std::string>
SplitList (const std::string &v)
{
  std::vector<std::string> out;
  std::string item;
  std::istringstream is (v);
  while (std::getline (is, item, ','))
    {
      item = Trim (item);
      if (item.empty ())
        {
          throw ValueError ("empty list element");
        }
      out.push_back (item);
    }
  if (out.empty ())
    {
      throw ValueError ("empty list");
    }
  return out;
}

template <typename T>
T
ParseNumber (const std::string &v)
{
  T out{};
  const char *end = v.data () + v.size ();
  const auto [ptr, ec] = std::from_chars (v.data (), end, out);
  if (ec != std::errc () || ptr != end || v.empty ())
    {
      throw ValueError ("not a number: '" + v + "'");
    }
  if constexpr (std::is_floating_point_v<T>)
    {
      if (!std::isfinite (out))
        {
          throw ValueError ("not a finite number: '" + v + "'");
        }
    }
  return out;
}

bool
ParseBool (const std::string &v)
{
  if (v == "true" || v == "1" || v == "yes" || v == "on")
    {
      return true;
    }
  if (v == "false" || v == "0" || v == "no" || v == "off")
    {
      return false;
    }
  throw ValueError ("not a boolean: '" + v + "'");
}

std::string
FormatDouble (double v)
{
  char buf[64];
  const auto [ptr, ec] = std::to_chars (buf, buf + sizeof buf, v);
  return std::string (buf, ptr);
}

std::string
FormatBool (bool b)
{
  return b ? "true" : "false";
}

std::string
Fixed (double v)
{
  char buf[64];
  std::snprintf (buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string
FormatChannels (const scenarios::ChannelPolicy &p)
{
  using Kind = scenarios::ChannelPolicy::Kind;
  switch (p.kind)
    {
    case Kind::SingleChannel:
      return "single";
    case Kind::EightTypeAB:
      return "eight_ab";
    case Kind::TwentyGrid:
      return "twenty_grid";
    case Kind::RandomFrom:
      return "random:" + std::to_string (p.poolSize);
    case Kind::Explicit:
      return "explicit";
    }
  return "single";
}

scenarios::ChannelPolicy
ParseChannels (const std::string &v)
{
  using Kind = scenarios::ChannelPolicy::Kind;
  scenarios::ChannelPolicy p;
  if (v == "single")
    {
      p.kind = Kind::SingleChannel;
    }
  else if (v == "eight_ab")
    {
      p.kind = Kind::EightTypeAB;
    }
  else if (v == "twenty_grid")
    {
      p.kind = Kind::TwentyGrid;
    }
  else if (v == "explicit")
    {
      p.kind = Kind::Explicit;
    }
  else if (v.rfind ("random:", 0) == 0)
    {
      p.kind = Kind::RandomFrom;
      p.poolSize = ParseNumber<int> (v.substr (7));
    }
  else
    {
      throw ValueError ("expected single, eight_ab, twenty_grid, random:C or explicit");
    }
  return p;
}

ScenarioKind
ParseScenario (const std::string &v)
{
  for (ScenarioKind k :
       {ScenarioKind::SingleAp, ScenarioKind::ScenarioA, ScenarioKind::ScenarioB, ScenarioKind::Hew})
    {
      if (ScenarioName (k) == v)
        {
          return k;
        }
    }
  throw ValueError ("expected single_ap, scenario_a, scenario_b or hew");
}

struct KeyDef
{
  const char *name;
  std::function<void (RunSpec &, const std::string &)> set;
  std::function<std::string (const RunSpec &)> get;
};

#define ECASIM_INT_KEY(NAME, FIELD, TYPE)                                                          \
  KeyDef                                                                                           \
  {                                                                                                \
    NAME, [] (RunSpec &s, const std::string &v) { s.FIELD = ParseNumber<TYPE> (v); },              \
      [] (const RunSpec &s) { return std::to_string (s.FIELD); }                                   \
  }
#define ECASIM_REAL_KEY(NAME, FIELD)                                                               \
  KeyDef                                                                                           \
  {                                                                                                \
    NAME, [] (RunSpec &s, const std::string &v) { s.FIELD = ParseNumber<double> (v); },            \
      [] (const RunSpec &s) { return FormatDouble (s.FIELD); }                                     \
  }
#define ECASIM_BOOL_KEY(NAME, FIELD)                                                               \
  KeyDef                                                                                           \
  {                                                                                                \
    NAME, [] (RunSpec &s, const std::string &v) { s.FIELD = ParseBool (v); },                      \
      [] (const RunSpec &s) { return FormatBool (s.FIELD); }                                       \
  }

const std::vector<KeyDef> &
Keys ()
{
  static const std::vector<KeyDef> keys = {
    {"scenario", [] (RunSpec &s, const std::string &v) { s.scenario = ParseScenario (v); },
     [] (const RunSpec &s) { return ScenarioName (s.scenario); }},
    {"protocols",
     [] (RunSpec &s, const std::string &v) {
       s.protocols.clear ();
       for (const std::string &name : SplitList (v))
         {
           try
             {
               s.protocols.push_back (mac::Protocol::Parse (name));
             }
           catch (const ConfigError &e)
             {
               throw ValueError (e.what ());
             }
         }
     },
     [] (const RunSpec &s) {
       std::string out;
       for (const mac::Protocol &p : s.protocols)
         {
           out += (out.empty () ? "" : ",") + p.Name ();
         }
       return out;
     }},
    ECASIM_INT_KEY ("iterations", iterations, int),
    ECASIM_INT_KEY ("seed", baseSeed, std::uint64_t),
    ECASIM_REAL_KEY ("duration", sim.durationS),
    {"output_dir", [] (RunSpec &s, const std::string &v) { s.outputDir = v; },
     [] (const RunSpec &s) { return s.outputDir.string (); }},
    {"n_stations",
     [] (RunSpec &s, const std::string &v) {
       s.nStations.clear ();
       for (const std::string &n : SplitList (v))
         {
           s.nStations.push_back (ParseNumber<int> (n));
         }
     },
     [] (const RunSpec &s) {
       std::string out;
       for (int n : s.nStations)
         {
           out += (out.empty () ? "" : ",") + std::to_string (n);
         }
       return out;
     }},
    ECASIM_INT_KEY ("n_aps", nAps, int),
    ECASIM_REAL_KEY ("delta_x", deltaXM),
    ECASIM_REAL_KEY ("delta", deltaM),
    ECASIM_REAL_KEY ("radius", radiusM),
    ECASIM_BOOL_KEY ("ideal", ideal),
    ECASIM_BOOL_KEY ("control", control),
    ECASIM_INT_KEY ("floors", building.floors, int),
    ECASIM_INT_KEY ("rooms_x", building.roomsX, int),
    ECASIM_INT_KEY ("rooms_y", building.roomsY, int),
    ECASIM_REAL_KEY ("room_side", building.roomSideM),
    ECASIM_REAL_KEY ("floor_height", building.floorHeightM),
    {"channels", [] (RunSpec &s, const std::string &v) { s.channels = ParseChannels (v); },
     [] (const RunSpec &s) { return FormatChannels (s.channels); }},
    {"channel_map_file", [] (RunSpec &s, const std::string &v) { s.channelMapFile = v; },
     [] (const RunSpec &s) { return s.channelMapFile.string (); }},
    ECASIM_INT_KEY ("cw_min", sim.mac.cwMin, std::uint32_t),
    ECASIM_INT_KEY ("cw_max", sim.mac.cwMax, std::uint32_t),
    ECASIM_INT_KEY ("retry_limit", sim.mac.retryLimit, std::uint32_t),
    ECASIM_INT_KEY ("slot_us", sim.mac.slotUs, Micros),
    ECASIM_INT_KEY ("difs_us", sim.mac.difsUs, Micros),
    ECASIM_INT_KEY ("sifs_us", sim.mac.sifsUs, Micros),
    ECASIM_INT_KEY ("stickiness", sim.mac.defaultStickiness, std::uint32_t),
    ECASIM_BOOL_KEY ("fair_share", fairShare),
    ECASIM_INT_KEY ("payload_bytes", sim.payloadBytes, std::uint32_t),
    ECASIM_INT_KEY ("mac_header_bytes", sim.macHeaderBytes, std::uint32_t),
    ECASIM_INT_KEY ("ack_bytes", sim.ackBytes, std::uint32_t),
    ECASIM_REAL_KEY ("phy_rate_mbps", sim.phyRateMbps),
    ECASIM_REAL_KEY ("ack_rate_mbps", sim.ackRateMbps),
    ECASIM_INT_KEY ("preamble_us", sim.preambleUs, Micros),
    ECASIM_INT_KEY ("ack_preamble_us", sim.ackPreambleUs, Micros),
    ECASIM_REAL_KEY ("tx_power_dbm", sim.thresholds.txPowerDbm),
    ECASIM_REAL_KEY ("cca_dbm", sim.thresholds.ccaEnergyDbm),
    ECASIM_REAL_KEY ("detect_dbm", sim.thresholds.frameDetectDbm),
    ECASIM_REAL_KEY ("noise_floor", propagation.noiseFloorDbm),
    {"capture",
     [] (RunSpec &s, const std::string &v) {
       if (v == "off")
         {
           s.propagation.captureThresholdDb.reset ();
         }
       else
         {
           s.propagation.captureThresholdDb = ParseNumber<double> (v);
         }
     },
     [] (const RunSpec &s) {
       return s.propagation.captureThresholdDb ? FormatDouble (*s.propagation.captureThresholdDb)
                                               : std::string ("off");
     }},
    ECASIM_REAL_KEY ("carrier_hz", propagation.params.carrierFrequencyHz),
    ECASIM_REAL_KEY ("wall_loss_db", propagation.params.perWallDb),
    ECASIM_REAL_KEY ("floor_loss_db", propagation.params.perFloorDb),
    ECASIM_BOOL_KEY ("strict_ack", sim.strictAck),
    ECASIM_INT_KEY ("workers", workers, int),
  };
  return keys;
}

#undef ECASIM_INT_KEY
#undef ECASIM_REAL_KEY
#undef ECASIM_BOOL_KEY

const KeyDef *
FindKey (const std::string &key)
{
  for (const KeyDef &k : Keys ())
    {
      if (key == k.name)
        {
          return &k;
        }
    }
  return nullptr;
}

void
Check (bool ok, const char *key, const std::string &what)
{
  if (!ok)
    {
      throw SpecError (key, 0, what);
    }
}

bool
IsPow2 (std::uint32_t v)
{
  return v != 0 && (v & (v - 1)) == 0;
}

} // namespace

std::string
ScenarioName (ScenarioKind k)
{
  switch (k)
    {
    case ScenarioKind::SingleAp:
      return "single_ap";
    case ScenarioKind::ScenarioA:
      return "scenario_a";
    case ScenarioKind::ScenarioB:
      return "scenario_b";
    case ScenarioKind::Hew:
      return "hew";
    }
  return "?";
}

void
RunSpec::Validate () const
{
  Check (iterations >= 1, "iterations", "must be >= 1");
  Check (!protocols.empty (), "protocols", "at least one protocol is required");
  Check (!nStations.empty (), "n_stations", "at least one value is required");
  for (int n : nStations)
    {
      Check (n >= 1, "n_stations", "must be >= 1");
    }
  Check (nAps >= 1, "n_aps", "must be >= 1");
  Check (deltaXM > 0.0, "delta_x", "must be positive");
  Check (deltaM > 0.0, "delta", "must be positive");
  Check (radiusM > 0.0, "radius", "must be positive");
  Check (building.floors >= 1, "floors", "must be >= 1");
  Check (building.roomsX >= 1, "rooms_x", "must be >= 1");
  Check (building.roomsY >= 1, "rooms_y", "must be >= 1");
  Check (building.roomSideM > 0.0, "room_side", "must be positive");
  Check (building.floorHeightM > 0.0, "floor_height", "must be positive");
  Check (sim.durationS > 0.0, "duration", "must be positive");
  Check (workers >= 1, "workers", "must be >= 1");
  Check (IsPow2 (sim.mac.cwMin) && sim.mac.cwMin >= 2, "cw_min", "must be a power of two >= 2");
  Check (IsPow2 (sim.mac.cwMax) && sim.mac.cwMax >= sim.mac.cwMin, "cw_max",
         "must be a power of two >= cw_min");
  Check (sim.mac.retryLimit >= 1, "retry_limit", "must be >= 1");
  Check (sim.mac.slotUs > 0, "slot_us", "must be positive");
  Check (sim.mac.difsUs > 0, "difs_us", "must be positive");
  Check (sim.mac.sifsUs > 0, "sifs_us", "must be positive");
  Check (sim.payloadBytes >= 1, "payload_bytes", "must be positive");
  Check (sim.phyRateMbps > 0.0, "phy_rate_mbps", "must be positive");
  Check (sim.ackRateMbps > 0.0, "ack_rate_mbps", "must be positive");
  Check (sim.preambleUs >= 0, "preamble_us", "must be non-negative");
  Check (sim.ackPreambleUs >= 0, "ack_preamble_us", "must be non-negative");
  Check (sim.thresholds.ccaEnergyDbm > sim.thresholds.frameDetectDbm, "cca_dbm",
         "must be above detect_dbm");
  Check (propagation.noiseFloorDbm < -60.0, "noise_floor", "must be below -60 dBm");
  Check (propagation.params.carrierFrequencyHz > 0.0, "carrier_hz", "must be positive");
  Check (propagation.params.perWallDb >= 0.0, "wall_loss_db", "must be non-negative");
  Check (propagation.params.perFloorDb >= 0.0, "floor_loss_db", "must be non-negative");
  if (channels.kind == scenarios::ChannelPolicy::Kind::RandomFrom)
    {
      Check (channels.poolSize >= 1
                 && channels.poolSize <= static_cast<int> (scenarios::ChannelPool ().size ()),
             "channels", "random pool size must be between 1 and "
                             + std::to_string (scenarios::ChannelPool ().size ()));
    }
  const bool needsBuilding = channels.kind == scenarios::ChannelPolicy::Kind::EightTypeAB
                             || channels.kind == scenarios::ChannelPolicy::Kind::TwentyGrid
                             || channels.kind == scenarios::ChannelPolicy::Kind::Explicit;
  Check (!needsBuilding || scenario == ScenarioKind::Hew, "channels",
         "this allocation needs scenario = hew");
  Check ((channels.kind == scenarios::ChannelPolicy::Kind::Explicit) == !channelMapFile.empty (),
         "channel_map_file", "required exactly when channels = explicit");
  for (const mac::Protocol &p : protocols)
    {
      try
        {
          p.Validate (sim.mac);
        }
      catch (const ConfigError &e)
        {
          throw SpecError ("protocols", 0, e.what ());
        }
    }
}

std::vector<std::string>
SpecKeys ()
{
  std::vector<std::string> out;
  for (const KeyDef &k : Keys ())
    {
      out.emplace_back (k.name);
    }
  return out;
}

void
SetKey (RunSpec &spec, const std::string &key, const std::string &value)
{
  const KeyDef *def = FindKey (key);
  if (!def)
    {
      throw SpecError (key, 0, "unknown key");
    }
  try
    {
      def->set (spec, value);
    }
  catch (const ValueError &e)
    {
      throw SpecError (key, 0, e.what ());
    }
}

RunSpec
ParseSpec (std::istream &in, const Overrides &overrides)
{
  RunSpec spec;
  std::map<std::string, int> lineOf;
  std::string raw;
  int lineNo = 0;
  while (std::getline (in, raw))
    {
      ++lineNo;
      const std::string line = Trim (raw.substr (0, raw.find ('#')));
      if (line.empty ())
        {
          continue;
        }
      const auto eq = line.find ('=');
      if (eq == std::string::npos)
        {
          throw SpecError (line, lineNo, "expected 'key = value'");
        }
      const std::string key = Trim (line.substr (0, eq));
      const std::string value = Trim (line.substr (eq + 1));
      try
        {
          SetKey (spec, key, value);
        }
      catch (const SpecError &e)
        {
          throw SpecError (key, lineNo, e.Detail ());
        }
      lineOf[key] = lineNo;
    }
  for (const auto &[key, value] : overrides)
    {
      SetKey (spec, key, value);
      lineOf.erase (key);
    }
  try
    {
      spec.Validate ();
    }
  catch (const SpecError &e)
    {
      const auto it = lineOf.find (e.Key ());
      if (it != lineOf.end ())
        {
          throw SpecError (e.Key (), it->second, e.Detail ());
        }
      throw;
    }
  return spec;
}

RunSpec
ParseSpecFile (const fs::path &path, const Overrides &overrides)
{
  std::ifstream in (path);
  if (!in)
    {
      throw ConfigError ("cannot read spec file " + path.string ());
    }
  return ParseSpec (in, overrides);
}

std::string
FormatSpec (const RunSpec &spec)
{
  std::string out;
  for (const KeyDef &k : Keys ())
    {
      out += std::string (k.name) + " = " + k.get (spec) + "\n";
    }
  return out;
}

scenarios::Scenario
BuildScenario (const RunSpec &spec, int nStations, std::uint64_t seed)
{
  scenarios::Scenario sc;
  switch (spec.scenario)
    {
    case ScenarioKind::SingleAp:
      sc = scenarios::GenSingleAp (nStations, spec.radiusM, spec.ideal);
      break;
    case ScenarioKind::ScenarioA:
      sc = scenarios::GenScenarioA (spec.nAps, nStations, spec.deltaXM, spec.deltaM, spec.control);
      break;
    case ScenarioKind::ScenarioB:
      sc = scenarios::GenScenarioB (spec.nAps, nStations, spec.deltaXM, spec.deltaM, seed);
      break;
    case ScenarioKind::Hew:
      sc = scenarios::GenHewBuilding (spec.building, nStations, seed);
      break;
    }
  if (std::holds_alternative<channel::LogDistance> (sc.channel))
    {
      sc.channel = spec.propagation;
    }
  scenarios::ChannelPolicy policy = spec.channels;
  if (policy.kind == scenarios::ChannelPolicy::Kind::Explicit)
    {
      policy.explicitMap = scenarios::ReadChannelMapFile (spec.channelMapFile);
    }
  scenarios::AllocateChannels (sc.topology, policy, seed);
  return sc;
}

engine::SimConfig
BuildConfig (const RunSpec &spec, const scenarios::Scenario &scenario,
             const mac::Protocol &protocol, std::uint64_t seed)
{
  engine::SimConfig c = spec.sim;
  c.channel = scenario.channel;
  c.protocol = protocol;
  c.protocol.fairShare = protocol.fairShare || spec.fairShare;
  c.seed = seed;
  return c;
}

namespace {

struct Job
{
  std::size_t protocol;
  int nStations;
  int iteration;
  std::uint64_t seed;
};

std::string
ProtocolLabel (const RunSpec &spec, std::size_t i)
{
  mac::Protocol p = spec.protocols[i];
  p.fairShare = p.fairShare || spec.fairShare;
  return p.Name ();
}

class Writer
{
public:
  explicit Writer (std::vector<fs::path> &written) : m_written (written) {}

  void Write (const fs::path &path, const std::string &content)
  {
    std::ofstream out (path, std::ios::binary | std::ios::trunc);
    if (out)
      {
        out << content;
        out.close ();
      }
    if (!out)
      {
        throw IoError ("cannot write " + path.string () + ": " + std::strerror (errno));
      }
    m_written.push_back (path);
  }

private:
  std::vector<fs::path> &m_written;
};

std::string
RawCsv (const engine::RunResult &r)
{
  std::string out = "node_id,wlan,floor,successes_count,failures_count,drops_count,"
                    "attempts_count,in_flight_count,delivered_bytes,throughput_mbps\n";
  for (const NodeSpec &n : r.nodes)
    {
      if (n.role != Role::Station)
        {
          continue;
        }
      const PerNodeStats &s = r.stats[n.id];
      out += std::to_string (n.id) + "," + std::to_string (n.wlan) + ","
             + (n.floor ? std::to_string (*n.floor) : std::string ()) + ","
             + std::to_string (s.successes) + "," + std::to_string (s.failures) + ","
             + std::to_string (s.drops) + "," + std::to_string (s.attempts) + ","
             + std::to_string (s.inFlight) + "," + std::to_string (s.deliveredBytes) + ","
             + Fixed (metrics::ThroughputMbps (s, r.simSeconds)) + "\n";
    }
  return out;
}

std::string
Cell (const metrics::Summary &s)
{
  return Fixed (s.mean) + "," + (s.stddev ? Fixed (*s.stddev) : std::string ());
}

std::string
Tab (const metrics::Summary &s)
{
  return Fixed (s.mean) + "\t" + (s.stddev ? Fixed (*s.stddev) : std::string ());
}

std::vector<metrics::Grouping>
GroupingsFor (const RunSpec &spec)
{
  std::vector<metrics::Grouping> g{metrics::Grouping::Overall, metrics::Grouping::PerWlan,
                                   metrics::Grouping::PerStation};
  if (spec.scenario == ScenarioKind::Hew)
    {
      g.push_back (metrics::Grouping::PerFloor);
    }
  return g;
}

const metrics::MultiRunRow *
OverallRow (const AggregateSet &a)
{
  const auto it = a.tables.find (metrics::Grouping::Overall);
  if (it == a.tables.end () || it->second.empty ())
    {
      return nullptr;
    }
  return &it->second.front ();
}

} // namespace

std::vector<fs::path>
EmitPlotData (const std::vector<AggregateSet> &aggregates, const fs::path &dir)
{
  std::vector<fs::path> written;
  if (aggregates.empty ())
    {
      return written;
    }
  Writer w (written);
  std::vector<std::string> protocols;
  for (const AggregateSet &a : aggregates)
    {
      if (std::find (protocols.begin (), protocols.end (), a.protocol) == protocols.end ())
        {
          protocols.push_back (a.protocol);
        }
    }
  for (const std::string &p : protocols)
    {
      std::string tput = "n_stations\tthroughput_mbps_mean\tthroughput_mbps_std\n";
      std::string fail = "n_stations\tfailure_fraction_mean\tfailure_fraction_std\n";
      std::string station = "n_stations\tstation\tthroughput_mbps_mean\tthroughput_mbps_std\n";
      std::string jfi = "n_stations\twlan\tjfi_mean\tjfi_std\n";
      std::string floor = "n_stations\tfloor\tthroughput_mbps_mean\tthroughput_mbps_std\t"
                          "failure_fraction_mean\tfailure_fraction_std\tattempts_count_mean\t"
                          "attempts_count_std\n";
      bool hasFloor = false;
      for (const AggregateSet &a : aggregates)
        {
          if (a.protocol != p)
            {
              continue;
            }
          const std::string n = std::to_string (a.nStations);
          if (const metrics::MultiRunRow *o = OverallRow (a))
            {
              tput += n + "\t" + Tab (o->throughputMbps) + "\n";
              fail += n + "\t" + Tab (o->failureFraction) + "\n";
            }
          if (auto it = a.tables.find (metrics::Grouping::PerStation); it != a.tables.end ())
            {
              for (const auto &r : it->second)
                {
                  station += n + "\t" + std::to_string (r.group) + "\t" + Tab (r.throughputMbps) + "\n";
                }
            }
          if (auto it = a.tables.find (metrics::Grouping::PerWlan); it != a.tables.end ())
            {
              for (const auto &r : it->second)
                {
                  jfi += n + "\t" + std::to_string (r.group) + "\t" + Tab (r.jfi) + "\n";
                }
            }
          if (auto it = a.tables.find (metrics::Grouping::PerFloor); it != a.tables.end ())
            {
              hasFloor = true;
              for (const auto &r : it->second)
                {
                  floor += n + "\t" + std::to_string (r.group) + "\t" + Tab (r.throughputMbps) + "\t"
                           + Tab (r.failureFraction) + "\t" + Tab (r.attempts) + "\n";
                }
            }
        }
      w.Write (dir / ("plot_throughput_" + p + ".tsv"), tput);
      w.Write (dir / ("plot_failures_" + p + ".tsv"), fail);
      w.Write (dir / ("plot_per_station_" + p + ".tsv"), station);
      w.Write (dir / ("plot_jfi_" + p + ".tsv"), jfi);
      if (hasFloor)
        {
          w.Write (dir / ("plot_per_floor_" + p + ".tsv"), floor);
        }
    }
  return written;
}

ExecuteResult
Execute (const RunSpec &spec)
{
  spec.Validate ();
  ExecuteResult result;

  std::vector<Job> jobs;
  for (std::size_t p = 0; p < spec.protocols.size (); ++p)
    {
      for (int n : spec.nStations)
        {
          for (int it = 0; it < spec.iterations; ++it)
            {
              jobs.push_back ({p, n, it, spec.baseSeed + static_cast<std::uint64_t> (it)});
            }
        }
    }

  std::vector<engine::RunResult> runs (jobs.size ());
  std::vector<std::exception_ptr> errors (jobs.size ());
  std::atomic<std::size_t> next{0};
  auto worker = [&] () {
    for (std::size_t i = next++; i < jobs.size (); i = next++)
      {
        try
          {
            const Job &j = jobs[i];
            const scenarios::Scenario sc = BuildScenario (spec, j.nStations, j.seed);
            runs[i] = engine::Run (sc.topology,
                                   BuildConfig (spec, sc, spec.protocols[j.protocol], j.seed));
          }
        catch (...)
          {
            errors[i] = std::current_exception ();
          }
      }
  };
  const std::size_t nThreads
      = std::min<std::size_t> (static_cast<std::size_t> (spec.workers), jobs.size ());
  if (nThreads <= 1)
    {
      worker ();
    }
  else
    {
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < nThreads; ++t)
        {
          pool.emplace_back (worker);
        }
      for (std::thread &t : pool)
        {
          t.join ();
        }
    }
  for (const std::exception_ptr &e : errors)
    {
      if (e)
        {
          std::rethrow_exception (e);
        }
    }

  // Aggregates in (protocol, N) order.
  const auto groupings = GroupingsFor (spec);
  for (std::size_t first = 0; first < jobs.size (); first += spec.iterations)
    {
      AggregateSet a;
      a.protocol = ProtocolLabel (spec, jobs[first].protocol);
      a.nStations = jobs[first].nStations;
      std::span<const engine::RunResult> cell (runs.data () + first, spec.iterations);
      for (metrics::Grouping g : groupings)
        {
          a.tables[g] = metrics::AggregateRuns (cell, g);
        }
      result.aggregates.push_back (std::move (a));
    }

  Writer w (result.files);
  const fs::path dir = spec.outputDir;
  std::string status = "complete";
  try
    {
      std::error_code ec;
      fs::create_directories (dir / "raw", ec);
      if (ec)
        {
          throw IoError ("cannot create " + (dir / "raw").string () + ": " + ec.message ());
        }
      for (std::size_t i = 0; i < jobs.size (); ++i)
        {
          const Job &j = jobs[i];
          w.Write (dir / "raw"
                       / (ProtocolLabel (spec, j.protocol) + "_n" + std::to_string (j.nStations)
                          + "_it" + std::to_string (j.iteration) + ".csv"),
                   RawCsv (runs[i]));
        }
      for (metrics::Grouping g : groupings)
        {
          std::string csv = "protocol,n_stations,group,members_count,throughput_mbps_mean,"
                            "throughput_mbps_std,failure_fraction_mean,failure_fraction_std,"
                            "attempts_count_mean,attempts_count_std,jfi_mean,jfi_std\n";
          for (const AggregateSet &a : result.aggregates)
            {
              for (const metrics::MultiRunRow &r : a.tables.at (g))
                {
                  csv += a.protocol + "," + std::to_string (a.nStations) + ","
                         + std::to_string (r.group) + "," + std::to_string (r.members) + ","
                         + Cell (r.throughputMbps) + "," + Cell (r.failureFraction) + ","
                         + Cell (r.attempts) + "," + Cell (r.jfi) + "\n";
                }
            }
          w.Write (dir / (std::string ("aggregate_") + metrics::GroupingName (g) + ".csv"), csv);
        }
      for (const fs::path &p : EmitPlotData (result.aggregates, dir))
        {
          result.files.push_back (p);
        }
    }
  catch (const IoError &e)
    {
      status = std::string ("incomplete: ") + e.what ();
      result.error = e.what ();
      result.exitCode = 1;
    }

  std::string manifest = "# ecasim run manifest; re-run with: ecasim --spec <this file>\n";
  manifest += FormatSpec (spec);
  manifest += "# iteration seeds:";
  for (int it = 0; it < spec.iterations; ++it)
    {
      manifest += " " + std::to_string (spec.baseSeed + static_cast<std::uint64_t> (it));
    }
  manifest += "\n# status: " + status + "\n";
  for (const fs::path &p : result.files)
    {
      manifest += "# file: " + fs::relative (p, dir).generic_string () + "\n";
    }
  try
    {
      w.Write (dir / "manifest.txt", manifest);
    }
  catch (const IoError &e)
    {
      if (result.exitCode == 0)
        {
          result.error = e.what ();
          result.exitCode = 1;
        }
    }
  return result;
}

} // namespace ecasim::batch
