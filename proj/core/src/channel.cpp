#include "ecasim/channel.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace ecasim::channel {

namespace {

// Range comparisons tolerate rounding in generated geometry, so a node
// placed exactly on a range boundary is inside it.
constexpr double kRangeSlackM = 1e-9;

} // namespace

void
Validate (const ChannelModel &model)
{
  if (const auto *disc = std::get_if<BinaryDisc> (&model))
    {
      if (!(disc->txRangeM > 0.0) || !(disc->txRangeM <= disc->csRangeM))
        {
          throw ConfigError ("binary disc model requires 0 < tx_range <= cs_range");
        }
      return;
    }
  const auto &log = std::get<LogDistance> (model);
  if (!(log.params.carrierFrequencyHz > 0.0))
    {
      throw ConfigError ("carrier frequency must be positive");
    }
  if (log.params.perWallDb < 0.0 || log.params.perFloorDb < 0.0)
    {
      throw ConfigError ("wall and floor losses must be non-negative");
    }
  if (!(log.noiseFloorDbm < -60.0))
    {
      throw ConfigError ("noise floor must be below -60 dBm");
    }
}

void
SenseThresholds::Validate () const
{
  if (!(frameDetectDbm < ccaEnergyDbm))
    {
      throw ConfigError ("frame detect threshold must be below the CCA energy threshold");
    }
}

double
DbmToMilliwatt (double dbm)
{
  return std::pow (10.0, dbm / 10.0);
}

double
MilliwattToDbm (double mw)
{
  return 10.0 * std::log10 (mw);
}

double
PathLoss (double distanceM, const PathLossParams &params, ObstacleCount obstacles)
{
  if (!(distanceM > 0.0))
    {
      throw std::domain_error ("PathLoss: distance must be positive");
    }
  const double bp = params.breakpointM;
  double loss = 40.05 + 20.0 * std::log10 (params.carrierFrequencyHz / 5e9)
                + 20.0 * std::log10 (std::min (distanceM, bp));
  if (distanceM > bp)
    {
      loss += 35.0 * std::log10 (distanceM / bp);
    }
  loss += params.perFloorDb * obstacles.floors + params.perWallDb * obstacles.walls;
  return loss;
}

Arrival
ReceivedPower (double txPowerDbm, const Position &tx, const Position &rx, const ChannelModel &model,
               ObstacleCount obstacles)
{
  const double d = Distance (tx, rx);
  if (const auto *disc = std::get_if<BinaryDisc> (&model))
    {
      if (d <= disc->txRangeM + kRangeSlackM)
        {
          return {ArrivalKind::Decodable, txPowerDbm};
        }
      if (d <= disc->csRangeM + kRangeSlackM)
        {
          return {ArrivalKind::SenseOnly, txPowerDbm};
        }
      return {ArrivalKind::Unreachable, 0.0};
    }
  const auto &log = std::get<LogDistance> (model);
  return {ArrivalKind::Decodable, txPowerDbm - PathLoss (d, log.params, obstacles)};
}

ObstacleCount
CountObstacles (const Position &tx, const Position &rx, const BuildingGeometry *building)
{
  if (building == nullptr)
    {
      return {};
    }
  const RoomIndex a = LocateRoom (tx, *building);
  const RoomIndex b = LocateRoom (rx, *building);
  // Rooms form a regular grid, so the segment crosses one boundary plane per
  // room index step along each horizontal axis.
  return {std::abs (a.x - b.x) + std::abs (a.y - b.y), std::abs (a.floor - b.floor)};
}

bool
IsDetectable (const Arrival &a, const ChannelModel &model, const SenseThresholds &th)
{
  if (std::holds_alternative<BinaryDisc> (model))
    {
      return a.IsReachable ();
    }
  return a.IsReachable () && a.powerDbm >= th.frameDetectDbm;
}

SenseState
CarrierSenseState (std::span<const Arrival> arrivals, const ChannelModel &model,
                   const SenseThresholds &th)
{
  const bool disc = std::holds_alternative<BinaryDisc> (model);
  double energyMw = 0.0;
  for (const Arrival &a : arrivals)
    {
      if (IsDetectable (a, model, th))
        {
          return SenseState::Busy;
        }
      if (!disc && a.IsReachable ())
        {
          energyMw += DbmToMilliwatt (a.powerDbm);
        }
    }
  if (!disc && energyMw > 0.0 && MilliwattToDbm (energyMw) >= th.ccaEnergyDbm)
    {
      return SenseState::Busy;
    }
  return SenseState::Idle;
}

Reception
ReceptionOutcome (const Arrival &frame, std::span<const Arrival> overlapping,
                  const ChannelModel &model, const SenseThresholds &th)
{
  if (std::holds_alternative<BinaryDisc> (model))
    {
      if (frame.kind != ArrivalKind::Decodable)
        {
          return Reception::Undetected;
        }
      for (const Arrival &o : overlapping)
        {
          if (o.IsReachable ())
            {
              return Reception::Corrupted;
            }
        }
      return Reception::Decoded;
    }

  const auto &log = std::get<LogDistance> (model);
  if (!frame.IsReachable () || frame.powerDbm < th.frameDetectDbm)
    {
      return Reception::Undetected;
    }
  if (!log.captureThresholdDb)
    {
      for (const Arrival &o : overlapping)
        {
          if (IsDetectable (o, model, th))
            {
              return Reception::Corrupted;
            }
        }
      return Reception::Decoded;
    }
  double interferenceMw = DbmToMilliwatt (log.noiseFloorDbm);
  for (const Arrival &o : overlapping)
    {
      if (o.IsReachable ())
        {
          interferenceMw += DbmToMilliwatt (o.powerDbm);
        }
    }
  const double sinrDb = frame.powerDbm - MilliwattToDbm (interferenceMw);
  return sinrDb >= *log.captureThresholdDb ? Reception::Decoded : Reception::Corrupted;
}

} // namespace ecasim::channel
