#ifndef ECASIM_BUILDING_HPP
#define ECASIM_BUILDING_HPP

#include "ecasim/types.hpp"

namespace ecasim {

/// Axis-aligned grid of square rooms: floors x rooms_x x rooms_y, each room
/// room_side_m wide and floor_height_m tall. The building's origin is (0,0,0).
struct BuildingGeometry
{
  int floors = 5;
  int roomsX = 10;
  int roomsY = 2;
  double roomSideM = 10.0;
  double floorHeightM = 3.0;

  int RoomsPerFloor () const { return roomsX * roomsY; }
  int RoomCount () const { return floors * RoomsPerFloor (); }

  /// Throws ConfigError on non-positive counts or sizes.
  void Validate () const;
};

struct RoomIndex
{
  int floor = 0;
  int x = 0;
  int y = 0;

  bool operator== (const RoomIndex &) const = default;
};

RoomIndex LocateRoom (const Position &p, const BuildingGeometry &b);

} // namespace ecasim

#endif
