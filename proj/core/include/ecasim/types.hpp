#ifndef ECASIM_TYPES_HPP
#define ECASIM_TYPES_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ecasim {

using NodeId = std::uint32_t;

/// Simulated time in integer microseconds. All MAC/PHY constants are whole
/// microseconds, so event ordering never depends on floating point rounding.
using Micros = std::int64_t;

using ChannelNumber = int;

struct Position
{
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool operator== (const Position &) const = default;
};

double Distance (const Position &a, const Position &b);

/// Finite coordinates and z >= 0.
bool IsValid (const Position &p);

/// Thrown for user-facing configuration problems (bad parameters, invalid
/// topologies, malformed run specifications).
class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

} // namespace ecasim

#endif
