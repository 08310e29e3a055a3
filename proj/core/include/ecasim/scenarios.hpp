#ifndef ECASIM_SCENARIOS_HPP
#define ECASIM_SCENARIOS_HPP

#include "ecasim/channel.hpp"
#include "ecasim/topology.hpp"

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <utility>

namespace ecasim::scenarios {

/// A generated topology together with the channel model it is meant to be
/// simulated with.
struct Scenario
{
  Topology topology;
  channel::ChannelModel channel;
};

/// Default operating channel for single-channel deployments.
inline constexpr ChannelNumber kDefaultChannel = 48;

/// One AP at the origin, stations evenly spaced on a circle. `ideal`
/// selects a disc model whose ranges cover every pair.
Scenario GenSingleAp (int nStations, double radiusM, bool ideal);

/// Linear array of APs every deltaX metres along x; each AP's stations sit
/// on a circle of radius delta, station j at angle j*2*pi/N (j = 0 faces
/// the next AP). `control` selects the disc model with both ranges 2*delta.
Scenario GenScenarioA (int nAps, int nPerAp, double deltaXM, double deltaM, bool control);

/// APs as in GenScenarioA (at z = 1.5 m); stations uniform in the square
/// [-delta, delta]^2 around their AP at z = 1.5 m.
Scenario GenScenarioB (int nAps, int nPerAp, double deltaXM, double deltaM, std::uint64_t seed);

/// One AP per room of the building plus nPerAp stations in the same room,
/// all uniformly placed in the room's footprint at 1.5 m above its floor.
Scenario GenHewBuilding (const BuildingGeometry &geometry, int nPerAp, std::uint64_t seed);

/// Explicit channel assignment keyed by (floor, room-within-floor), where
/// room = y * roomsX + x.
using RoomChannelMap = std::map<std::pair<int, int>, ChannelNumber>;

struct ChannelPolicy
{
  enum class Kind
  {
    SingleChannel,
    EightTypeAB,
    TwentyGrid,
    RandomFrom,
    Explicit,
  };

  Kind kind = Kind::SingleChannel;
  /// Pool size for RandomFrom.
  int poolSize = 20;
  RoomChannelMap explicitMap;
};

/// The 20 MHz 5 GHz channel numbers used to build allocation pools.
const std::vector<ChannelNumber> &ChannelPool ();

/// Reassigns AP (and hence station) channels. Positions and associations
/// are untouched. Throws ConfigError when the policy needs a building and
/// the topology has none, or when an explicit map misses a room.
void AllocateChannels (Topology &topology, const ChannelPolicy &policy, std::uint64_t seed);

/// Parses "floor room channel" integer triples, one per line. Blank lines
/// and '#' comments are ignored.
RoomChannelMap ParseChannelMap (std::istream &in);
RoomChannelMap ReadChannelMapFile (const std::filesystem::path &path);

} // namespace ecasim::scenarios

#endif
