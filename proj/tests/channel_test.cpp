#include "ecasim/channel.hpp"
#include "ecasim/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace ecasim;
using namespace ecasim::channel;

namespace {

// Straight evaluation of the indoor model, kept separate from the library.
double
OraclePathLoss (double d, double fc, int floors, int walls)
{
  double pl = 40.05 + 20.0 * std::log10 (fc / 5e9) + 20.0 * std::log10 (d < 5.0 ? d : 5.0);
  if (d > 5.0)
    {
      pl += 35.0 * std::log10 (d / 5.0);
    }
  return pl + 17.0 * floors + 12.0 * walls;
}

PathLossParams
AtFrequency (double fc)
{
  PathLossParams p;
  p.carrierFrequencyHz = fc;
  return p;
}

Arrival
At (double dbm)
{
  return {ArrivalKind::Decodable, dbm};
}

} // namespace

TEST (PathLoss, ReferenceValues)
{
  EXPECT_NEAR (PathLoss (1.0, AtFrequency (5e9), {}), 40.05, 1e-9);
  EXPECT_NEAR (PathLoss (5.0, AtFrequency (5.24e9), {}), 54.44, 0.01);
  EXPECT_NEAR (PathLoss (10.0, AtFrequency (5.24e9), {2, 1}), 105.97, 0.01);
}

TEST (PathLoss, MatchesOracleOnRandomInputs)
{
  Rng rng = Rng::Derive (7, StreamTag::Test);
  for (int i = 0; i < 500; ++i)
    {
      const double d = rng.UniformReal (0.01, 200.0);
      const double fc = rng.UniformReal (2.4e9, 6e9);
      const int z = static_cast<int> (rng.UniformBelow (5));
      const int w = static_cast<int> (rng.UniformBelow (10));
      EXPECT_NEAR (PathLoss (d, AtFrequency (fc), {w, z}), OraclePathLoss (d, fc, z, w), 1e-9);
    }
}

TEST (PathLoss, MonotoneInDistanceWallsFloors)
{
  const PathLossParams p;
  double prev = PathLoss (0.1, p, {});
  for (double d = 0.2; d < 100.0; d += 0.1)
    {
      const double cur = PathLoss (d, p, {});
      EXPECT_GE (cur, prev);
      prev = cur;
    }
  EXPECT_LT (PathLoss (10, p, {0, 0}), PathLoss (10, p, {1, 0}));
  EXPECT_LT (PathLoss (10, p, {0, 0}), PathLoss (10, p, {0, 1}));
}

TEST (PathLoss, ContinuousAtBreakpoint)
{
  const PathLossParams p;
  EXPECT_NEAR (PathLoss (5.0 - 1e-9, p, {}), PathLoss (5.0 + 1e-9, p, {}), 1e-6);
}

TEST (PathLoss, RejectsNonPositiveDistance)
{
  EXPECT_THROW (PathLoss (0.0, PathLossParams{}, {}), std::domain_error);
  EXPECT_THROW (PathLoss (-1.0, PathLossParams{}, {}), std::domain_error);
}

TEST (ReceivedPower, LogDistanceAtOneMetre)
{
  LogDistance m;
  m.params.carrierFrequencyHz = 5e9;
  const Arrival a = ReceivedPower (15.0, {0, 0, 0}, {1, 0, 0}, m, {});
  EXPECT_EQ (a.kind, ArrivalKind::Decodable);
  EXPECT_NEAR (a.powerDbm, -25.05, 1e-9);
}

TEST (ReceivedPower, DiscRanges)
{
  const BinaryDisc m{10.0, 10.0};
  EXPECT_EQ (ReceivedPower (15, {0, 0, 0}, {12, 0, 0}, m, {}).kind, ArrivalKind::Unreachable);
  const Arrival in = ReceivedPower (15, {0, 0, 0}, {8, 0, 0}, m, {});
  EXPECT_EQ (in.kind, ArrivalKind::Decodable);
  EXPECT_DOUBLE_EQ (in.powerDbm, 15.0);
  // Boundary is inclusive.
  EXPECT_EQ (ReceivedPower (15, {0, 0, 0}, {10, 0, 0}, m, {}).kind, ArrivalKind::Decodable);
  const BinaryDisc ring{10.0, 20.0};
  EXPECT_EQ (ReceivedPower (15, {0, 0, 0}, {15, 0, 0}, ring, {}).kind, ArrivalKind::SenseOnly);
}

TEST (CountObstacles, RoomGrid)
{
  const BuildingGeometry b;
  EXPECT_EQ (CountObstacles ({1, 1, 1.5}, {9, 9, 1.5}, &b), (ObstacleCount{0, 0}));
  EXPECT_EQ (CountObstacles ({5, 5, 1.5}, {15, 5, 1.5}, &b), (ObstacleCount{1, 0}));
  EXPECT_EQ (CountObstacles ({5, 5, 1.5}, {5, 5, 4.5}, &b), (ObstacleCount{0, 1}));
  EXPECT_EQ (CountObstacles ({5, 5, 1.5}, {35, 15, 7.5}, &b), (ObstacleCount{4, 2}));
  EXPECT_EQ (CountObstacles ({5, 5, 1.5}, {35, 15, 7.5}, nullptr), (ObstacleCount{0, 0}));
}

TEST (CarrierSense, Thresholds)
{
  const LogDistance m;
  const SenseThresholds th;
  EXPECT_EQ (CarrierSenseState (std::vector<Arrival>{}, m, th), SenseState::Idle);
  EXPECT_EQ (CarrierSenseState (std::vector{At (-75)}, m, th), SenseState::Busy);
  EXPECT_EQ (CarrierSenseState (std::vector{At (-85)}, m, th), SenseState::Idle);
}

TEST (CarrierSense, EnergySumOfUndetectableFrames)
{
  // Below the detect level each, but the linear sum crosses the energy level.
  SenseThresholds th;
  th.frameDetectDbm = -60.0;
  const LogDistance m;
  const double sum = 10.0 * std::log10 (3.0 * std::pow (10.0, -6.5));
  EXPECT_NEAR (sum, -60.23, 0.01);
  EXPECT_EQ (CarrierSenseState (std::vector{At (-65), At (-65), At (-65)}, m, th), SenseState::Busy);
  EXPECT_EQ (CarrierSenseState (std::vector{At (-65)}, m, th), SenseState::Idle);
  // With the default detect level a single -65 dBm frame is already detected.
  EXPECT_EQ (CarrierSenseState (std::vector{At (-65), At (-65), At (-65)}, m, SenseThresholds{}),
             SenseState::Busy);
}

TEST (CarrierSense, DiscIgnoresPower)
{
  const BinaryDisc m;
  const SenseThresholds th;
  EXPECT_EQ (CarrierSenseState (std::vector{Arrival{ArrivalKind::SenseOnly, 15}}, m, th),
             SenseState::Busy);
  EXPECT_EQ (CarrierSenseState (std::vector{Arrival{ArrivalKind::Unreachable, 0}}, m, th),
             SenseState::Idle);
}

TEST (Reception, SoleFrameDecoded)
{
  EXPECT_EQ (ReceptionOutcome (At (-50), {}, LogDistance{}, SenseThresholds{}), Reception::Decoded);
}

TEST (Reception, BelowDetectIsUndetected)
{
  EXPECT_EQ (ReceptionOutcome (At (-90), {}, LogDistance{}, SenseThresholds{}),
             Reception::Undetected);
}

TEST (Reception, SymmetricCollisionWithoutCapture)
{
  const LogDistance m;
  const SenseThresholds th;
  EXPECT_EQ (ReceptionOutcome (At (-50), std::vector{At (-60)}, m, th), Reception::Corrupted);
  EXPECT_EQ (ReceptionOutcome (At (-60), std::vector{At (-50)}, m, th), Reception::Corrupted);
}

TEST (Reception, CaptureUsesLinearSinr)
{
  LogDistance m;
  m.captureThresholdDb = 20.0;
  const SenseThresholds th;
  // Linear-domain SINR of -50 against -75 plus -94 noise.
  const double sinr = -50.0
                      - 10.0 * std::log10 (std::pow (10.0, -7.5) + std::pow (10.0, -9.4));
  EXPECT_NEAR (sinr, 24.95, 0.01);
  EXPECT_EQ (ReceptionOutcome (At (-50), std::vector{At (-75)}, m, th), Reception::Decoded);
  EXPECT_EQ (ReceptionOutcome (At (-75), std::vector{At (-50)}, m, th), Reception::Corrupted);
  m.captureThresholdDb = 25.0;
  EXPECT_EQ (ReceptionOutcome (At (-50), std::vector{At (-75)}, m, th), Reception::Corrupted);
}

TEST (Reception, UndetectableInterfererDoesNotCorrupt)
{
  LogDistance m;
  const SenseThresholds th;
  // -90 dBm is below detection, so it does not corrupt by itself.
  EXPECT_EQ (ReceptionOutcome (At (-50), std::vector{At (-90)}, m, th), Reception::Decoded);
}

TEST (Reception, DiscModel)
{
  const BinaryDisc m{10.0, 20.0};
  const SenseThresholds th;
  const Arrival in{ArrivalKind::Decodable, 15};
  const Arrival ring{ArrivalKind::SenseOnly, 15};
  const Arrival far{ArrivalKind::Unreachable, 0};
  EXPECT_EQ (ReceptionOutcome (in, {}, m, th), Reception::Decoded);
  EXPECT_EQ (ReceptionOutcome (ring, {}, m, th), Reception::Undetected);
  EXPECT_EQ (ReceptionOutcome (in, std::vector{ring}, m, th), Reception::Corrupted);
  EXPECT_EQ (ReceptionOutcome (in, std::vector{far}, m, th), Reception::Decoded);
}

TEST (ChannelModel, ValidateRejectsBadRanges)
{
  EXPECT_THROW (Validate (BinaryDisc{10.0, 5.0}), ConfigError);
  EXPECT_THROW (Validate (BinaryDisc{-1.0, 5.0}), ConfigError);
  EXPECT_NO_THROW (Validate (BinaryDisc{10.0, 10.0}));
  LogDistance bad;
  bad.params.carrierFrequencyHz = 0;
  EXPECT_THROW (Validate (bad), ConfigError);
}

TEST (Units, DbmRoundTrip)
{
  for (double dbm = -120; dbm <= 30; dbm += 7.5)
    {
      EXPECT_NEAR (MilliwattToDbm (DbmToMilliwatt (dbm)), dbm, 1e-9);
    }
  EXPECT_NEAR (DbmToMilliwatt (0.0), 1.0, 1e-12);
}
