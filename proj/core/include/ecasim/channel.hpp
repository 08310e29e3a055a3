#ifndef ECASIM_CHANNEL_HPP
#define ECASIM_CHANNEL_HPP

#include "ecasim/building.hpp"
#include "ecasim/types.hpp"

#include <optional>
#include <span>
#include <variant>

namespace ecasim::channel {

/// Parameters of the indoor log-distance model with wall and floor
/// penetration losses (single breakpoint at 5 m, exponent 3.5 beyond it).
struct PathLossParams
{
  double carrierFrequencyHz = 5.24e9;
  double perWallDb = 12.0;
  double perFloorDb = 17.0;
  double breakpointM = 5.0;
};

struct ObstacleCount
{
  int walls = 0;
  int floors = 0;

  bool operator== (const ObstacleCount &) const = default;
};

/// Ideal range-based channel. Frames from within txRangeM are decodable;
/// frames from (txRangeM, csRangeM] are sensed but never decodable.
struct BinaryDisc
{
  double txRangeM = 10.0;
  double csRangeM = 10.0;
};

struct LogDistance
{
  PathLossParams params;
  double noiseFloorDbm = -94.0;
  /// Disabled (nullopt) means any overlapping detectable frame corrupts.
  std::optional<double> captureThresholdDb;
};

using ChannelModel = std::variant<BinaryDisc, LogDistance>;

/// Throws ConfigError when the model violates its invariants.
void Validate (const ChannelModel &model);

struct SenseThresholds
{
  double ccaEnergyDbm = -62.0;
  double frameDetectDbm = -82.0;
  double txPowerDbm = 15.0;

  void Validate () const;
};

/// Path loss in dB at `distance` metres. Throws std::domain_error for
/// distance <= 0.
double PathLoss (double distanceM, const PathLossParams &params, ObstacleCount obstacles);

enum class ArrivalKind
{
  Decodable,
  SenseOnly,
  Unreachable,
};

/// Signal as seen at one receiver. For LogDistance every arrival is
/// Decodable-kind with a finite power; thresholds are applied later.
struct Arrival
{
  ArrivalKind kind = ArrivalKind::Unreachable;
  double powerDbm = 0.0;

  bool IsReachable () const { return kind != ArrivalKind::Unreachable; }
};

Arrival ReceivedPower (double txPowerDbm, const Position &tx, const Position &rx,
                       const ChannelModel &model, ObstacleCount obstacles);

/// Walls and floors crossed by the straight segment tx->rx. Without a
/// building there are none.
ObstacleCount CountObstacles (const Position &tx, const Position &rx,
                              const BuildingGeometry *building);

enum class SenseState
{
  Idle,
  Busy,
};

/// True if a single arrival is above the frame detection level (or, for the
/// disc model, comes from within carrier-sense range).
bool IsDetectable (const Arrival &a, const ChannelModel &model, const SenseThresholds &th);

/// Carrier sense at one listener given the arrivals of all transmissions
/// currently on its channel.
SenseState CarrierSenseState (std::span<const Arrival> arrivals, const ChannelModel &model,
                              const SenseThresholds &th);

enum class Reception
{
  Decoded,
  Corrupted,
  Undetected,
};

/// Outcome of one frame at one receiver, given the arrivals (at the same
/// receiver) of every other same-channel transmission overlapping it.
Reception ReceptionOutcome (const Arrival &frame, std::span<const Arrival> overlapping,
                            const ChannelModel &model, const SenseThresholds &th);

double DbmToMilliwatt (double dbm);
double MilliwattToDbm (double mw);

} // namespace ecasim::channel

#endif
