#include "ecasim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>

namespace ecasim::engine {

namespace {

constexpr Micros kNever = std::numeric_limits<Micros>::min () / 4;

// Received power is accumulated in integer femto-milliwatts (-150 dBm
// resolution) so that adding and removing arrivals is exact and order
// independent.
std::int64_t
ToFemtoMw (double dbm)
{
  const double v = std::round (channel::DbmToMilliwatt (dbm) * 1e15);
  if (v >= 9.0e17)
    {
      return static_cast<std::int64_t> (9.0e17);
    }
  return static_cast<std::int64_t> (v);
}

Micros
AirtimeUs (Micros preamble, std::uint64_t bytes, double rateMbps)
{
  const double bits = 8.0 * static_cast<double> (bytes);
  // The small epsilon keeps exact multiples from rounding up.
  return preamble + static_cast<Micros> (std::ceil (bits / rateMbps - 1e-9));
}

struct Link
{
  channel::Arrival arrival;
  std::int64_t femtoMw = 0;
  bool detectable = false;
};

enum class EventType : std::uint8_t
{
  TxEnd,
  TxArm,
  ExchangeDone,
  DataStart,
  AckStart,
};

// Same-instant ordering: frames ending, then node timers (which may arm
// transmissions), then frames starting. Nodes arming at the same instant
// therefore cannot hear each other and collide.
std::uint8_t
PhaseOf (EventType t)
{
  switch (t)
    {
    case EventType::TxEnd:
      return 0;
    case EventType::TxArm:
    case EventType::ExchangeDone:
      return 1;
    case EventType::DataStart:
    case EventType::AckStart:
      return 2;
    }
  return 3;
}

struct Event
{
  Micros time;
  std::uint8_t phase;
  std::uint64_t seq;
  EventType type;
  std::uint32_t subject;
  std::uint64_t generation;

  bool operator> (const Event &o) const
  {
    if (time != o.time)
      {
        return time > o.time;
      }
    if (phase != o.phase)
      {
        return phase > o.phase;
      }
    return seq > o.seq;
  }
};

enum class NodeState
{
  Passive,
  Contending,
  Transmitting,
  AwaitingOutcome,
};

enum class BaseStep
{
  None,
  Idle,
  Busy,
};

struct NodeRuntime
{
  NodeState state = NodeState::Passive;
  mac::BackoffState backoff;
  Rng rng{0};
  PerNodeStats stats;

  // Carrier sense bookkeeping (other nodes' frames only).
  int detectCount = 0;
  std::int64_t energyFemtoMw = 0;
  bool busy = false;
  Micros busySince = kNever;
  Micros lastBusyStart = kNever;
  Micros lastBusyEnd = kNever;

  // Countdown bookkeeping.
  bool pendingBusySlot = false;
  bool armed = false;
  std::uint64_t armGeneration = 0;
  Micros armBase = 0;
  BaseStep armBaseStep = BaseStep::None;
  Micros armTxTime = 0;

  // Current exchange.
  Micros attemptStart = 0;
  Micros lastDataEnd = kNever;
  std::uint32_t nAggregated = 1;
  bool ackSent = false;
  bool ackReceived = false;
};

struct AirFrame
{
  FrameTransmission frame;
  std::vector<NodeId> overlappingTx;
  bool live = false;
};

class Simulator
{
public:
  Simulator (const Topology &topology, const SimConfig &config)
    : m_topo (topology),
      m_cfg (config),
      m_n (topology.Size ()),
      m_isDisc (std::holds_alternative<channel::BinaryDisc> (config.channel)),
      m_ccaFemtoMw (ToFemtoMw (config.thresholds.ccaEnergyDbm)),
      m_slot (config.mac.slotUs),
      m_difs (config.mac.difsUs),
      m_sifs (config.mac.sifsUs),
      m_ackDuration (AckDuration (config)),
      m_endTime (static_cast<Micros> (std::llround (config.durationS * 1e6)))
  {
    BuildLinks ();
    for (const NodeSpec &n : m_topo.nodes)
      {
        m_channelMembers[n.channel].push_back (n.id);
      }
    m_nodes.resize (m_n);
    for (const NodeSpec &n : m_topo.nodes)
      {
        NodeRuntime &rt = m_nodes[n.id];
        rt.rng = Rng::Derive (m_cfg.seed, StreamTag::NodeBackoff, n.id);
        if (n.role == Role::Station)
          {
            rt.state = NodeState::Contending;
            rt.backoff = mac::InitialState (m_cfg.protocol, m_cfg.mac, rt.rng);
          }
      }
  }

  RunResult Execute ()
  {
    for (const NodeSpec &n : m_topo.nodes)
      {
        if (n.role == Role::Station)
          {
            Arm (n.id, 0, 0);
          }
      }
    while (!m_queue.empty ())
      {
        const Event ev = m_queue.top ();
        if (ev.time > m_endTime)
          {
            break;
          }
        m_queue.pop ();
        if (ev.time < m_now)
          {
            throw std::logic_error ("event scheduled in the past");
          }
        m_now = ev.time;
        ++m_result.eventsProcessed;
        Dispatch (ev);
      }
    return Finish ();
  }

private:
  const Link &LinkOf (NodeId tx, NodeId rx) const { return m_links[tx * m_n + rx]; }

  void BuildLinks ()
  {
    m_links.resize (m_n * m_n);
    const BuildingGeometry *b = m_topo.building ? &*m_topo.building : nullptr;
    for (std::size_t i = 0; i < m_n; ++i)
      {
        for (std::size_t j = 0; j < m_n; ++j)
          {
            if (i == j)
              {
                continue;
              }
            const Position &pi = m_topo.nodes[i].position;
            const Position &pj = m_topo.nodes[j].position;
            Link &l = m_links[i * m_n + j];
            l.arrival = channel::ReceivedPower (m_cfg.thresholds.txPowerDbm, pi, pj, m_cfg.channel,
                                                channel::CountObstacles (pi, pj, b));
            l.detectable = channel::IsDetectable (l.arrival, m_cfg.channel, m_cfg.thresholds);
            if (!m_isDisc && l.arrival.IsReachable ())
              {
                l.femtoMw = ToFemtoMw (l.arrival.powerDbm);
              }
          }
      }
  }

  void Schedule (Micros t, EventType type, std::uint32_t subject, std::uint64_t gen = 0)
  {
    m_queue.push ({t, PhaseOf (type), m_seq++, type, subject, gen});
  }

  void Dispatch (const Event &ev)
  {
    switch (ev.type)
      {
      case EventType::TxEnd:
        OnTxEnd (ev.subject);
        break;
      case EventType::TxArm:
        OnTxArm (ev.subject, ev.generation);
        break;
      case EventType::ExchangeDone:
        OnExchangeDone (ev.subject);
        break;
      case EventType::DataStart:
        StartFrame (ev.subject, m_topo.nodes[ev.subject].ap, false);
        break;
      case EventType::AckStart:
        StartFrame (m_topo.nodes[ev.subject].ap, ev.subject, true);
        break;
      }
  }

  // ---- carrier sense -------------------------------------------------------

  bool SensedBusy (const NodeRuntime &rt) const
  {
    return rt.detectCount > 0 || (!m_isDisc && rt.energyFemtoMw >= m_ccaFemtoMw);
  }

  void UpdateListeners (const FrameTransmission &f, int sign)
  {
    for (NodeId l : m_channelMembers[f.channel])
      {
        if (l == f.txNode || (f.isAck && l == f.rxNode))
          {
            continue;
          }
        const Link &link = LinkOf (f.txNode, l);
        if (!link.arrival.IsReachable ())
          {
            continue;
          }
        NodeRuntime &rt = m_nodes[l];
        rt.detectCount += link.detectable ? sign : 0;
        rt.energyFemtoMw += sign * link.femtoMw;
        const bool busy = SensedBusy (rt);
        if (busy == rt.busy)
          {
            continue;
          }
        rt.busy = busy;
        if (busy)
          {
            rt.busySince = m_now;
            OnMediumBusy (l);
          }
        else
          {
            rt.lastBusyStart = rt.busySince;
            rt.lastBusyEnd = m_now;
            OnMediumIdle (l);
          }
      }
  }

  // ---- contention ----------------------------------------------------------

  // Start (or restart) the countdown with the medium idle since idleSince.
  // A busy period that ended before the node could react is credited as one
  // busy slot at the first boundary the node can still act on.
  void Arm (NodeId id, Micros idleSince, Micros now)
  {
    NodeRuntime &rt = m_nodes[id];
    const Micros b0 = idleSince + m_difs;
    Micros base = b0;
    BaseStep step = rt.pendingBusySlot ? BaseStep::Busy : BaseStep::None;
    if (b0 < now)
      {
        const Micros k = (now - b0 + m_slot - 1) / m_slot;
        base = b0 + k * m_slot;
        if (step == BaseStep::None)
          {
            step = BaseStep::Idle;
          }
      }
    if (rt.backoff.counter == 0)
      {
        step = BaseStep::None;
      }
    const std::uint32_t afterBase = rt.backoff.counter - (step == BaseStep::None ? 0 : 1);
    rt.armed = true;
    rt.armBase = base;
    rt.armBaseStep = step;
    rt.armTxTime = base + static_cast<Micros> (afterBase) * m_slot;
    ++rt.armGeneration;
    Schedule (rt.armTxTime, EventType::TxArm, id, rt.armGeneration);
  }

  // Apply every countdown step that has completed by time t.
  void ConsumeCountdown (NodeRuntime &rt, Micros t)
  {
    if (t < rt.armBase)
      {
        return;
      }
    if (rt.armBaseStep == BaseStep::Busy)
      {
        mac::ElapseBusySlot (rt.backoff);
        rt.pendingBusySlot = false;
      }
    else if (rt.armBaseStep == BaseStep::Idle)
      {
        mac::ElapseIdleSlots (rt.backoff, 1);
      }
    const Micros idle = (t - rt.armBase) / m_slot;
    mac::ElapseIdleSlots (rt.backoff, static_cast<std::uint32_t> (idle));
  }

  void OnMediumBusy (NodeId id)
  {
    NodeRuntime &rt = m_nodes[id];
    if (rt.state != NodeState::Contending || !rt.armed)
      {
        return;
      }
    ConsumeCountdown (rt, m_now);
    rt.armed = false;
    ++rt.armGeneration;
  }

  void OnMediumIdle (NodeId id)
  {
    NodeRuntime &rt = m_nodes[id];
    if (rt.state != NodeState::Contending)
      {
        return;
      }
    if (rt.lastBusyStart >= rt.lastDataEnd)
      {
        rt.pendingBusySlot = true;
      }
    Arm (id, m_now, m_now);
  }

  void OnTxArm (NodeId id, std::uint64_t gen)
  {
    NodeRuntime &rt = m_nodes[id];
    if (!rt.armed || gen != rt.armGeneration || rt.state != NodeState::Contending)
      {
        return;
      }
    if (rt.busy)
      {
        throw std::logic_error ("transmission armed while the medium is sensed busy");
      }
    ConsumeCountdown (rt, m_now);
    if (rt.backoff.counter != 0)
      {
        throw std::logic_error ("countdown expired with a non-zero counter");
      }
    rt.armed = false;
    ++rt.armGeneration;
    rt.pendingBusySlot = false;
    rt.state = NodeState::Transmitting;
    rt.attemptStart = m_now;
    rt.nAggregated = mac::FramesPerAttempt (rt.backoff, m_cfg.protocol);
    rt.ackSent = false;
    rt.ackReceived = false;
    ++rt.stats.attempts;
    Schedule (m_now, EventType::DataStart, id);
  }

  // ---- frames --------------------------------------------------------------

  std::uint32_t AllocFrameSlot ()
  {
    if (!m_freeSlots.empty ())
      {
        const std::uint32_t s = m_freeSlots.back ();
        m_freeSlots.pop_back ();
        return s;
      }
    m_air.emplace_back ();
    return static_cast<std::uint32_t> (m_air.size () - 1);
  }

  void StartFrame (NodeId tx, NodeId rx, bool isAck)
  {
    const NodeSpec &src = m_topo.nodes[tx];
    const std::uint32_t slot = AllocFrameSlot ();
    AirFrame &af = m_air[slot];
    af.live = true;
    af.overlappingTx.clear ();
    FrameTransmission &f = af.frame;
    f.txNode = tx;
    f.rxNode = rx;
    f.startUs = m_now;
    f.channel = src.channel;
    f.powerDbm = m_cfg.thresholds.txPowerDbm;
    f.isAck = isAck;
    if (isAck)
      {
        f.nAggregated = 1;
        f.durationUs = m_ackDuration;
        ++m_result.acksSent;
      }
    else
      {
        f.nAggregated = m_nodes[tx].nAggregated;
        f.durationUs = FrameDuration (m_cfg.payloadBytes, f.nAggregated, m_cfg);
        ++m_result.framesSent;
      }
    if (m_cfg.recordTrace)
      {
        m_result.trace.push_back (f);
      }

    auto &live = m_liveByChannel[f.channel];
    for (std::uint32_t other : live)
      {
        m_air[other].overlappingTx.push_back (tx);
        af.overlappingTx.push_back (m_air[other].frame.txNode);
      }
    live.push_back (slot);
    UpdateListeners (f, +1);
    Schedule (f.EndUs (), EventType::TxEnd, slot);
  }

  channel::Reception Receive (const AirFrame &af) const
  {
    const NodeId rx = af.frame.rxNode;
    m_scratch.clear ();
    for (NodeId o : af.overlappingTx)
      {
        if (o == rx)
          {
            // Half duplex: the receiver transmitted during the frame.
            return channel::Reception::Corrupted;
          }
        m_scratch.push_back (LinkOf (o, rx).arrival);
      }
    return channel::ReceptionOutcome (LinkOf (af.frame.txNode, rx).arrival, m_scratch,
                                      m_cfg.channel, m_cfg.thresholds);
  }

  void OnTxEnd (std::uint32_t slot)
  {
    AirFrame &af = m_air[slot];
    const FrameTransmission f = af.frame;
    auto &live = m_liveByChannel[f.channel];
    live.erase (std::find (live.begin (), live.end (), slot));
    UpdateListeners (f, -1);

    if (!f.isAck)
      {
        NodeRuntime &sta = m_nodes[f.txNode];
        sta.state = NodeState::AwaitingOutcome;
        sta.lastDataEnd = m_now;
        if (Receive (af) == channel::Reception::Decoded)
          {
            sta.ackSent = true;
            Schedule (m_now + m_sifs, EventType::AckStart, f.txNode);
          }
        Schedule (m_now + m_sifs + m_ackDuration, EventType::ExchangeDone, f.txNode);
      }
    else
      {
        NodeRuntime &sta = m_nodes[f.rxNode];
        sta.ackReceived = !m_cfg.strictAck || Receive (af) == channel::Reception::Decoded;
      }
    af.live = false;
    m_freeSlots.push_back (slot);
  }

  void OnExchangeDone (NodeId id)
  {
    NodeRuntime &rt = m_nodes[id];
    const bool success = rt.ackSent && rt.ackReceived;
    const std::uint32_t nAgg = rt.nAggregated;
    bool dropped = false;
    if (success)
      {
        ++rt.stats.successes;
        rt.stats.deliveredBytes += static_cast<std::uint64_t> (nAgg) * m_cfg.payloadBytes;
        rt.backoff = mac::AfterSuccess (std::move (rt.backoff), m_cfg.protocol, m_cfg.mac, rt.rng);
      }
    else
      {
        ++rt.stats.failures;
        auto r = mac::AfterFailure (std::move (rt.backoff), m_cfg.protocol, m_cfg.mac, rt.rng);
        rt.backoff = std::move (r.state);
        dropped = r.dropped;
        if (dropped)
          {
            ++rt.stats.drops;
          }
      }
    if (m_cfg.recordAttempts)
      {
        m_result.attempts.push_back ({id, rt.attemptStart, success, dropped, nAgg});
      }

    rt.state = NodeState::Contending;
    // A foreign busy period that began after our data frame is a slot we
    // have to count; anything overlapping our own frame belongs to our slot.
    if (rt.lastBusyEnd != kNever && rt.lastBusyStart >= rt.lastDataEnd)
      {
        rt.pendingBusySlot = true;
      }
    if (rt.busy)
      {
        return;
      }
    const Micros ownEnd = rt.ackSent ? m_now : rt.lastDataEnd;
    Arm (id, std::max (ownEnd, rt.lastBusyEnd), m_now);
  }

  RunResult Finish ()
  {
    m_result.nodes = m_topo.nodes;
    m_result.simSeconds = m_cfg.durationS;
    m_result.stats.resize (m_n);
    for (std::size_t i = 0; i < m_n; ++i)
      {
        NodeRuntime &rt = m_nodes[i];
        if (rt.state == NodeState::Transmitting || rt.state == NodeState::AwaitingOutcome)
          {
            rt.stats.inFlight = 1;
          }
        m_result.stats[i] = rt.stats;
      }
    return std::move (m_result);
  }

  const Topology &m_topo;
  const SimConfig &m_cfg;
  const std::size_t m_n;
  const bool m_isDisc;
  const std::int64_t m_ccaFemtoMw;
  const Micros m_slot;
  const Micros m_difs;
  const Micros m_sifs;
  const Micros m_ackDuration;
  const Micros m_endTime;

  std::vector<Link> m_links;
  std::map<ChannelNumber, std::vector<NodeId>> m_channelMembers;
  std::map<ChannelNumber, std::vector<std::uint32_t>> m_liveByChannel;
  std::vector<NodeRuntime> m_nodes;
  std::vector<AirFrame> m_air;
  std::vector<std::uint32_t> m_freeSlots;
  mutable std::vector<channel::Arrival> m_scratch;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> m_queue;
  std::uint64_t m_seq = 0;
  Micros m_now = 0;
  RunResult m_result;
};

} // namespace

void
SimConfig::Validate () const
{
  if (!(durationS > 0.0) || !std::isfinite (durationS))
    {
      throw ConfigError ("duration must be positive");
    }
  if (payloadBytes == 0)
    {
      throw ConfigError ("payload must be positive");
    }
  if (!(phyRateMbps > 0.0) || !(ackRateMbps > 0.0))
    {
      throw ConfigError ("PHY and ACK rates must be positive");
    }
  if (preambleUs < 0 || ackPreambleUs < 0)
    {
      throw ConfigError ("preamble durations must be non-negative");
    }
  protocol.Validate (mac);
  channel::Validate (channel);
  thresholds.Validate ();
}

bool
RunResult::operator== (const RunResult &o) const
{
  auto sameFrame = [] (const FrameTransmission &a, const FrameTransmission &b) {
    return a.txNode == b.txNode && a.rxNode == b.rxNode && a.startUs == b.startUs
           && a.durationUs == b.durationUs && a.channel == b.channel && a.powerDbm == b.powerDbm
           && a.nAggregated == b.nAggregated && a.isAck == b.isAck;
  };
  auto sameAttempt = [] (const AttemptRecord &a, const AttemptRecord &b) {
    return a.node == b.node && a.startUs == b.startUs && a.success == b.success
           && a.dropped == b.dropped && a.nAggregated == b.nAggregated;
  };
  return stats == o.stats && simSeconds == o.simSeconds && eventsProcessed == o.eventsProcessed
         && framesSent == o.framesSent && acksSent == o.acksSent
         && std::equal (attempts.begin (), attempts.end (), o.attempts.begin (), o.attempts.end (),
                        sameAttempt)
         && std::equal (trace.begin (), trace.end (), o.trace.begin (), o.trace.end (), sameFrame);
}

Micros
FrameDuration (std::uint32_t payloadBytes, std::uint32_t nAggregated, const SimConfig &config)
{
  if (nAggregated < 1)
    {
      throw std::invalid_argument ("FrameDuration: at least one payload per frame");
    }
  const std::uint64_t bytes = config.macHeaderBytes
                              + static_cast<std::uint64_t> (nAggregated) * payloadBytes;
  return AirtimeUs (config.preambleUs, bytes, config.phyRateMbps);
}

Micros
AckDuration (const SimConfig &config)
{
  return AirtimeUs (config.ackPreambleUs, config.ackBytes, config.ackRateMbps);
}

RunResult
Run (const Topology &topology, const SimConfig &config)
{
  config.Validate ();
  topology.Validate ();
  Simulator sim (topology, config);
  return sim.Execute ();
}

channel::SenseState
ClassifySlot (NodeId listener, Micros slotStartUs, Micros slotEndUs,
              std::span<const FrameTransmission> timeline, const Topology &topology,
              const SimConfig &config)
{
  const NodeSpec &me = topology.nodes.at (listener);
  const BuildingGeometry *b = topology.building ? &*topology.building : nullptr;
  std::vector<const FrameTransmission *> relevant;
  for (const FrameTransmission &f : timeline)
    {
      if (f.channel != me.channel || f.txNode == listener || (f.isAck && f.rxNode == listener))
        {
          continue;
        }
      if (f.startUs < slotEndUs && f.EndUs () > slotStartUs)
        {
          relevant.push_back (&f);
        }
    }
  // The sensed state only changes when a frame starts, so checking the slot
  // start and every start inside the slot covers all instants.
  std::vector<Micros> instants{slotStartUs};
  for (const FrameTransmission *f : relevant)
    {
      if (f->startUs > slotStartUs)
        {
          instants.push_back (f->startUs);
        }
    }
  std::vector<channel::Arrival> arrivals;
  for (Micros t : instants)
    {
      arrivals.clear ();
      for (const FrameTransmission *f : relevant)
        {
          if (f->startUs <= t && t < f->EndUs ())
            {
              const Position &tx = topology.nodes.at (f->txNode).position;
              arrivals.push_back (channel::ReceivedPower (f->powerDbm, tx, me.position,
                                                          config.channel,
                                                          channel::CountObstacles (tx, me.position, b)));
            }
        }
      if (channel::CarrierSenseState (arrivals, config.channel, config.thresholds)
          == channel::SenseState::Busy)
        {
          return channel::SenseState::Busy;
        }
    }
  return channel::SenseState::Idle;
}

} // namespace ecasim::engine
