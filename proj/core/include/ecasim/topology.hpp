#ifndef ECASIM_TOPOLOGY_HPP
#define ECASIM_TOPOLOGY_HPP

#include "ecasim/building.hpp"
#include "ecasim/types.hpp"

#include <map>
#include <optional>
#include <vector>

namespace ecasim {

enum class Role
{
  AccessPoint,
  Station,
};

struct NodeSpec
{
  NodeId id = 0;
  Position position;
  Role role = Role::Station;
  /// For stations, the AP they are associated with; for APs, themselves.
  NodeId ap = 0;
  ChannelNumber channel = 48;
  /// WLAN index (0-based, one per AP).
  int wlan = 0;
  std::optional<int> floor;
};

/// A set of APs and stations. Node ids equal their index in `nodes`.
struct Topology
{
  std::vector<NodeSpec> nodes;
  std::optional<BuildingGeometry> building;

  std::size_t Size () const { return nodes.size (); }
  std::vector<NodeId> AccessPoints () const;
  std::vector<NodeId> Stations () const;
  std::size_t WlanCount () const;

  /// AP id -> channel.
  std::map<NodeId, ChannelNumber> ChannelMap () const;

  /// Set an AP's channel and propagate it to its stations.
  void SetApChannel (NodeId ap, ChannelNumber channel);

  /// Throws ConfigError unless ids are dense, every station is associated
  /// with exactly one AP on the same channel, positions are valid and
  /// pairwise distinct.
  void Validate () const;
};

} // namespace ecasim

#endif
