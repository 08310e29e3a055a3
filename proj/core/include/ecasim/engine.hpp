#ifndef ECASIM_ENGINE_HPP
#define ECASIM_ENGINE_HPP

#include "ecasim/channel.hpp"
#include "ecasim/mac.hpp"
#include "ecasim/stats.hpp"
#include "ecasim/topology.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace ecasim::engine {

struct SimConfig
{
  double durationS = 25.0;
  std::uint64_t seed = 1;
  std::uint32_t payloadBytes = 1470;
  double phyRateMbps = 72.2;
  double ackRateMbps = 24.0;
  Micros preambleUs = 44;
  Micros ackPreambleUs = 20;
  std::uint32_t macHeaderBytes = 36;
  std::uint32_t ackBytes = 14;
  mac::Protocol protocol;
  mac::MacParams mac;
  channel::ChannelModel channel = channel::LogDistance{};
  channel::SenseThresholds thresholds;
  /// Subject ACKs to reception at the station. Off: ACKs are never lost.
  bool strictAck = false;
  /// Keep one AttemptRecord per resolved attempt in the result.
  bool recordAttempts = false;
  /// Keep every frame put on the air in the result.
  bool recordTrace = false;

  /// Throws ConfigError on invalid values.
  void Validate () const;
};

/// A frame on the air.
struct FrameTransmission
{
  NodeId txNode = 0;
  NodeId rxNode = 0;
  Micros startUs = 0;
  Micros durationUs = 0;
  ChannelNumber channel = 0;
  double powerDbm = 0.0;
  std::uint32_t nAggregated = 1;
  bool isAck = false;

  Micros EndUs () const { return startUs + durationUs; }
};

struct AttemptRecord
{
  NodeId node = 0;
  Micros startUs = 0;
  bool success = false;
  bool dropped = false;
  std::uint32_t nAggregated = 1;
};

struct RunResult
{
  std::vector<NodeSpec> nodes;
  /// Indexed by node id; APs carry zero counters.
  std::vector<PerNodeStats> stats;
  double simSeconds = 0.0;
  std::uint64_t eventsProcessed = 0;
  std::uint64_t framesSent = 0;
  std::uint64_t acksSent = 0;
  std::vector<AttemptRecord> attempts;
  std::vector<FrameTransmission> trace;

  bool operator== (const RunResult &) const;
};

/// preamble + ceil(8 * (header + n * payload) / rate) microseconds.
Micros FrameDuration (std::uint32_t payloadBytes, std::uint32_t nAggregated, const SimConfig &config);

Micros AckDuration (const SimConfig &config);

/// Simulates saturated uplink traffic from every station for
/// config.durationS seconds. Deterministic in (topology, config).
/// Throws ConfigError on an invalid topology or configuration before any
/// event is processed.
RunResult Run (const Topology &topology, const SimConfig &config);

/// Carrier sense of `listener` over [slotStartUs, slotEndUs) given a frame
/// timeline: Busy if sensed busy at any instant of the slot. Frames sent by
/// the listener and ACKs addressed to it are not part of its sensing.
channel::SenseState ClassifySlot (NodeId listener, Micros slotStartUs, Micros slotEndUs,
                                  std::span<const FrameTransmission> timeline,
                                  const Topology &topology, const SimConfig &config);

} // namespace ecasim::engine

#endif
