#include "ecasim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <tuple>

namespace ecasim {

void
BuildingGeometry::Validate () const
{
  if (floors < 1 || roomsX < 1 || roomsY < 1)
    {
      throw ConfigError ("building needs at least one floor and one room per axis");
    }
  if (!(roomSideM > 0.0) || !(floorHeightM > 0.0))
    {
      throw ConfigError ("room side and floor height must be positive");
    }
}

RoomIndex
LocateRoom (const Position &p, const BuildingGeometry &b)
{
  auto cell = [] (double v, double size, int count) {
    const int i = static_cast<int> (std::floor (v / size));
    return std::clamp (i, 0, count - 1);
  };
  return {cell (p.z, b.floorHeightM, b.floors), cell (p.x, b.roomSideM, b.roomsX),
          cell (p.y, b.roomSideM, b.roomsY)};
}

std::vector<NodeId>
Topology::AccessPoints () const
{
  std::vector<NodeId> out;
  for (const NodeSpec &n : nodes)
    {
      if (n.role == Role::AccessPoint)
        {
          out.push_back (n.id);
        }
    }
  return out;
}

std::vector<NodeId>
Topology::Stations () const
{
  std::vector<NodeId> out;
  for (const NodeSpec &n : nodes)
    {
      if (n.role == Role::Station)
        {
          out.push_back (n.id);
        }
    }
  return out;
}

std::size_t
Topology::WlanCount () const
{
  return AccessPoints ().size ();
}

std::map<NodeId, ChannelNumber>
Topology::ChannelMap () const
{
  std::map<NodeId, ChannelNumber> out;
  for (const NodeSpec &n : nodes)
    {
      if (n.role == Role::AccessPoint)
        {
          out[n.id] = n.channel;
        }
    }
  return out;
}

void
Topology::SetApChannel (NodeId ap, ChannelNumber channel)
{
  if (ap >= nodes.size () || nodes[ap].role != Role::AccessPoint)
    {
      throw ConfigError ("SetApChannel: node " + std::to_string (ap) + " is not an AP");
    }
  for (NodeSpec &n : nodes)
    {
      if (n.ap == ap)
        {
          n.channel = channel;
        }
    }
}

void
Topology::Validate () const
{
  if (nodes.empty ())
    {
      throw ConfigError ("topology has no nodes");
    }
  if (building)
    {
      building->Validate ();
    }
  std::set<std::tuple<double, double, double>> seen;
  bool anyStation = false;
  for (std::size_t i = 0; i < nodes.size (); ++i)
    {
      const NodeSpec &n = nodes[i];
      const std::string who = "node " + std::to_string (i);
      if (n.id != i)
        {
          throw ConfigError (who + ": id does not match its index");
        }
      if (!IsValid (n.position))
        {
          throw ConfigError (who + ": position must be finite with z >= 0");
        }
      if (!seen.emplace (n.position.x, n.position.y, n.position.z).second)
        {
          throw ConfigError (who + ": position coincides with another node");
        }
      if (n.ap >= nodes.size ())
        {
          throw ConfigError (who + ": associated AP does not exist");
        }
      const NodeSpec &ap = nodes[n.ap];
      if (n.role == Role::AccessPoint)
        {
          if (n.ap != n.id)
            {
              throw ConfigError (who + ": an AP must reference itself");
            }
          continue;
        }
      anyStation = true;
      if (ap.role != Role::AccessPoint)
        {
          throw ConfigError (who + ": associated node is not an AP");
        }
      if (ap.channel != n.channel)
        {
          throw ConfigError (who + ": station channel differs from its AP's");
        }
      if (ap.wlan != n.wlan)
        {
          throw ConfigError (who + ": station WLAN differs from its AP's");
        }
    }
  if (!anyStation)
    {
      throw ConfigError ("topology has no stations");
    }
}

} // namespace ecasim
