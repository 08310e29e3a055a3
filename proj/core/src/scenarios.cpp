#include "ecasim/scenarios.hpp"

#include "ecasim/rng.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <tuple>

namespace ecasim::scenarios {

namespace {

constexpr double kDeviceHeightM = 1.5;

void
RequirePositive (int v, const char *what)
{
  if (v < 1)
    {
      throw ConfigError (std::string (what) + " must be >= 1");
    }
}

void
RequirePositive (double v, const char *what)
{
  if (!(v > 0.0) || !std::isfinite (v))
    {
      throw ConfigError (std::string (what) + " must be positive");
    }
}

NodeId
AddAp (Topology &t, const Position &p, int wlan, std::optional<int> floor = std::nullopt)
{
  const auto id = static_cast<NodeId> (t.nodes.size ());
  t.nodes.push_back ({id, p, Role::AccessPoint, id, kDefaultChannel, wlan, floor});
  return id;
}

void
AddStation (Topology &t, const Position &p, NodeId ap)
{
  const auto id = static_cast<NodeId> (t.nodes.size ());
  const NodeSpec &a = t.nodes[ap];
  t.nodes.push_back ({id, p, Role::Station, ap, a.channel, a.wlan, a.floor});
}

// Draws positions until one is not already taken.
class DistinctPlacer
{
public:
  bool Take (const Position &p) { return m_taken.emplace (p.x, p.y, p.z).second; }

private:
  std::set<std::tuple<double, double, double>> m_taken;
};

} // namespace

Scenario
GenSingleAp (int nStations, double radiusM, bool ideal)
{
  RequirePositive (nStations, "number of stations");
  RequirePositive (radiusM, "radius");
  Scenario s{Topology{}, channel::LogDistance{}};
  const NodeId ap = AddAp (s.topology, {0.0, 0.0, 0.0}, 0);
  for (int j = 0; j < nStations; ++j)
    {
      const double a = 2.0 * std::numbers::pi * j / nStations;
      AddStation (s.topology, {radiusM * std::cos (a), radiusM * std::sin (a), 0.0}, ap);
    }
  if (ideal)
    {
      const double range = 2.0 * radiusM + 1.0;
      s.channel = channel::BinaryDisc{range, range};
    }
  s.topology.Validate ();
  return s;
}

Scenario
GenScenarioA (int nAps, int nPerAp, double deltaXM, double deltaM, bool control)
{
  RequirePositive (nAps, "number of APs");
  RequirePositive (nPerAp, "stations per AP");
  RequirePositive (deltaXM, "AP separation");
  RequirePositive (deltaM, "station radius");
  Scenario s{Topology{}, channel::LogDistance{}};
  for (int i = 0; i < nAps; ++i)
    {
      const Position apPos{i * deltaXM, 0.0, 0.0};
      const NodeId ap = AddAp (s.topology, apPos, i);
      for (int j = 0; j < nPerAp; ++j)
        {
          const double a = 2.0 * std::numbers::pi * j / nPerAp;
          AddStation (s.topology,
                      {apPos.x + deltaM * std::cos (a), apPos.y + deltaM * std::sin (a), 0.0}, ap);
        }
    }
  if (control)
    {
      s.channel = channel::BinaryDisc{2.0 * deltaM, 2.0 * deltaM};
    }
  s.topology.Validate ();
  return s;
}

Scenario
GenScenarioB (int nAps, int nPerAp, double deltaXM, double deltaM, std::uint64_t seed)
{
  RequirePositive (nAps, "number of APs");
  RequirePositive (nPerAp, "stations per AP");
  RequirePositive (deltaXM, "AP separation");
  RequirePositive (deltaM, "placement half-width");
  Scenario s{Topology{}, channel::LogDistance{}};
  Rng rng = Rng::Derive (seed, StreamTag::ScenarioPlacement);
  DistinctPlacer placer;
  std::vector<NodeId> aps;
  for (int i = 0; i < nAps; ++i)
    {
      const Position p{i * deltaXM, 0.0, kDeviceHeightM};
      placer.Take (p);
      aps.push_back (AddAp (s.topology, p, i));
    }
  for (NodeId ap : aps)
    {
      const Position c = s.topology.nodes[ap].position;
      for (int j = 0; j < nPerAp; ++j)
        {
          Position p;
          do
            {
              p = {c.x + rng.UniformReal (-deltaM, deltaM), c.y + rng.UniformReal (-deltaM, deltaM),
                   kDeviceHeightM};
            }
          while (!placer.Take (p));
          AddStation (s.topology, p, ap);
        }
    }
  s.topology.Validate ();
  return s;
}

Scenario
GenHewBuilding (const BuildingGeometry &g, int nPerAp, std::uint64_t seed)
{
  g.Validate ();
  RequirePositive (nPerAp, "stations per AP");
  Scenario s{Topology{}, channel::LogDistance{}};
  s.topology.building = g;
  Rng rng = Rng::Derive (seed, StreamTag::ScenarioPlacement);
  DistinctPlacer placer;
  // Keep draws strictly inside the room so LocateRoom is unambiguous.
  const double inset = 1e-6 * g.roomSideM;

  auto draw = [&] (int f, int rx, int ry) {
    Position p;
    do
      {
        p = {rng.UniformReal (rx * g.roomSideM + inset, (rx + 1) * g.roomSideM - inset),
             rng.UniformReal (ry * g.roomSideM + inset, (ry + 1) * g.roomSideM - inset),
             f * g.floorHeightM + kDeviceHeightM};
      }
    while (!placer.Take (p));
    return p;
  };

  int wlan = 0;
  for (int f = 0; f < g.floors; ++f)
    {
      for (int ry = 0; ry < g.roomsY; ++ry)
        {
          for (int rx = 0; rx < g.roomsX; ++rx)
            {
              const NodeId ap = AddAp (s.topology, draw (f, rx, ry), wlan++, f);
              for (int j = 0; j < nPerAp; ++j)
                {
                  AddStation (s.topology, draw (f, rx, ry), ap);
                }
            }
        }
    }
  s.topology.Validate ();
  return s;
}

const std::vector<ChannelNumber> &
ChannelPool ()
{
  static const std::vector<ChannelNumber> pool{36,  40,  44,  48,  52,  56,  60,  64,  100,
                                               104, 108, 112, 116, 120, 124, 128, 132, 136,
                                               140, 144, 149, 153, 157, 161, 165};
  return pool;
}

void
AllocateChannels (Topology &t, const ChannelPolicy &policy, std::uint64_t seed)
{
  using Kind = ChannelPolicy::Kind;
  const auto &pool = ChannelPool ();
  const bool needsBuilding = policy.kind == Kind::EightTypeAB || policy.kind == Kind::TwentyGrid
                             || policy.kind == Kind::Explicit;
  if (needsBuilding && !t.building)
    {
      throw ConfigError ("channel policy requires a building topology");
    }
  if (policy.kind == Kind::RandomFrom
      && (policy.poolSize < 1 || policy.poolSize > static_cast<int> (pool.size ())))
    {
      throw ConfigError ("random channel pool size must be in [1, "
                         + std::to_string (pool.size ()) + "]");
    }

  Rng rng = Rng::Derive (seed, StreamTag::ChannelAllocation);
  for (NodeId ap : t.AccessPoints ())
    {
      ChannelNumber ch = kDefaultChannel;
      RoomIndex room;
      if (t.building)
        {
          room = LocateRoom (t.nodes[ap].position, *t.building);
        }
      switch (policy.kind)
        {
        case Kind::SingleChannel:
          break;
        case Kind::EightTypeAB:
          // TypeA on even floors, TypeB (shifted by 4) on odd floors, so
          // rooms stacked vertically never share a channel.
          ch = pool[(room.x + 4 * room.y + 4 * (room.floor % 2)) % 8];
          break;
        case Kind::TwentyGrid:
          // Rooms numbered through the whole building. With 20 rooms per
          // floor every floor repeats the same map.
          ch = pool[(room.floor * t.building->RoomsPerFloor () + room.y * t.building->roomsX
                     + room.x)
                    % 20];
          break;
        case Kind::RandomFrom:
          ch = pool[rng.UniformBelow (static_cast<std::uint64_t> (policy.poolSize))];
          break;
        case Kind::Explicit:
          {
            const int r = room.y * t.building->roomsX + room.x;
            const auto it = policy.explicitMap.find ({room.floor, r});
            if (it == policy.explicitMap.end ())
              {
                throw ConfigError ("channel map has no entry for floor " + std::to_string (room.floor)
                                   + " room " + std::to_string (r));
              }
            ch = it->second;
          }
          break;
        }
      t.SetApChannel (ap, ch);
    }
}

RoomChannelMap
ParseChannelMap (std::istream &in)
{
  RoomChannelMap out;
  std::string line;
  int lineNo = 0;
  while (std::getline (in, line))
    {
      ++lineNo;
      if (const auto hash = line.find ('#'); hash != std::string::npos)
        {
          line.erase (hash);
        }
      std::istringstream ls (line);
      int floor, room, ch;
      if (!(ls >> floor))
        {
          continue;
        }
      std::string extra;
      if (!(ls >> room >> ch) || (ls >> extra) || floor < 0 || room < 0 || ch <= 0)
        {
          throw ConfigError ("channel map line " + std::to_string (lineNo)
                             + ": expected 'floor room channel'");
        }
      out[{floor, room}] = ch;
    }
  return out;
}

RoomChannelMap
ReadChannelMapFile (const std::filesystem::path &path)
{
  std::ifstream in (path);
  if (!in)
    {
      throw ConfigError ("cannot open channel map file '" + path.string () + "'");
    }
  return ParseChannelMap (in);
}

} // namespace ecasim::scenarios
