#include "ecasim/mac.hpp"

#include <bit>
#include <stdexcept>

namespace ecasim::mac {

namespace {

bool
IsPowerOfTwo (std::uint32_t v)
{
  return v != 0 && std::has_single_bit (v);
}

std::uint32_t
CurrentBd (const BackoffState &s, const MacParams &p)
{
  return DeterministicBackoff (s.stage, p);
}

std::uint32_t
RandomCounter (int stage, const MacParams &p, Rng &rng)
{
  return static_cast<std::uint32_t> (rng.UniformBelow (ContentionWindow (stage, p)));
}

// Starts a new observation window sized for the current deterministic
// backoff. justChanged/previousBd are left to the caller.
void
RestartWindow (BackoffState &s, const Protocol &protocol, const MacParams &p)
{
  if (!protocol.UsesScheduleReset ())
    {
      s.sr.reset ();
      return;
    }
  if (!s.sr)
    {
      s.sr.emplace ();
    }
  const std::uint32_t bd = CurrentBd (s, p);
  s.sr->bitmap.assign (bd + 1, 0);
  s.sr->txSinceEval = 0;
  s.sr->gammaTarget = protocol.srVariant == SrVariant::Aggressive ? 1 : Gamma (bd, p);
  s.sr->cursor = 0;
}

// Undo a Schedule Reset reduction whose first transmission collided.
void
RevertScheduleChange (BackoffState &s, const MacParams &p)
{
  if (s.sr && s.sr->justChanged)
    {
      if (s.sr->previousBd)
        {
          s.stage = StageForDeterministicBackoff (*s.sr->previousBd, p);
        }
      s.sr->justChanged = false;
      s.sr->previousBd.reset ();
    }
}

void
RecordSlot (BackoffState &s, bool busy)
{
  if (s.counter == 0)
    {
      throw std::logic_error ("backoff slot elapsed with counter already at zero");
    }
  --s.counter;
  if (s.sr)
    {
      if (s.deterministic && s.sr->cursor < s.sr->bitmap.size ())
        {
          s.sr->bitmap[s.sr->cursor] |= busy ? 1 : 0;
        }
      ++s.sr->cursor;
    }
}

} // namespace

int
MacParams::MaxStage () const
{
  return std::countr_zero (cwMax) - std::countr_zero (cwMin);
}

void
MacParams::Validate () const
{
  if (!IsPowerOfTwo (cwMin) || cwMin < 2)
    {
      throw ConfigError ("cw_min must be a power of two >= 2");
    }
  if (!IsPowerOfTwo (cwMax) || cwMax < cwMin)
    {
      throw ConfigError ("cw_max must be a power of two >= cw_min");
    }
  if (retryLimit < 1)
    {
      throw ConfigError ("retry_limit must be >= 1");
    }
  if (slotUs <= 0 || difsUs <= 0 || sifsUs <= 0)
    {
      throw ConfigError ("slot, DIFS and SIFS durations must be positive");
    }
}

MacParams
Protocol::Effective (const MacParams &base) const
{
  MacParams p = base;
  if (reducedCwMax)
    {
      p.cwMax = *reducedCwMax;
    }
  return p;
}

void
Protocol::Validate (const MacParams &base) const
{
  base.Validate ();
  if (reducedCwMax)
    {
      if (kind != Kind::EcaHystSr)
        {
          throw ConfigError ("a reduced cw_max is only defined for eca_hyst_sr");
        }
      if (!IsPowerOfTwo (*reducedCwMax) || *reducedCwMax < base.cwMin
          || *reducedCwMax > base.cwMax)
        {
          throw ConfigError ("reduced cw_max must be a power of two in [cw_min, cw_max]");
        }
    }
}

std::string
Protocol::Name () const
{
  std::string name;
  switch (kind)
    {
    case Kind::Dcf:
      name = "dcf";
      break;
    case Kind::Eca:
      name = "eca";
      break;
    case Kind::EcaHyst:
      name = "eca_hyst";
      break;
    case Kind::EcaHystSr:
      name = "eca_hyst_sr";
      if (srVariant == SrVariant::Aggressive)
        {
          name += "_aggr";
        }
      if (reducedCwMax)
        {
          name += "_r" + std::to_string (*reducedCwMax);
        }
      break;
    }
  if (fairShare)
    {
      name += "_fs";
    }
  return name;
}

Protocol
Protocol::Parse (std::string_view name)
{
  std::string_view rest = name;
  Protocol p;
  auto consume = [&rest] (std::string_view prefix) {
    if (rest.substr (0, prefix.size ()) == prefix)
      {
        rest.remove_prefix (prefix.size ());
        return true;
      }
    return false;
  };
  if (rest.size () >= 3 && rest.substr (rest.size () - 3) == "_fs")
    {
      p.fairShare = true;
      rest.remove_suffix (3);
    }
  if (consume ("eca_hyst_sr"))
    {
      p.kind = Kind::EcaHystSr;
      if (consume ("_aggr"))
        {
          p.srVariant = SrVariant::Aggressive;
        }
      if (consume ("_r"))
        {
          std::uint32_t cap = 256;
          if (!rest.empty ())
            {
              cap = 0;
              for (char c : rest)
                {
                  if (c < '0' || c > '9' || cap > 100000000)
                    {
                      throw ConfigError ("unknown protocol '" + std::string (name) + "'");
                    }
                  cap = cap * 10 + static_cast<std::uint32_t> (c - '0');
                }
              rest = {};
            }
          p.reducedCwMax = cap;
        }
    }
  else if (consume ("eca_hyst"))
    {
      p.kind = Kind::EcaHyst;
    }
  else if (consume ("eca"))
    {
      p.kind = Kind::Eca;
    }
  else if (consume ("dcf"))
    {
      p.kind = Kind::Dcf;
    }
  if (!rest.empty () || name.empty () || (p.fairShare && p.kind == Kind::Dcf))
    {
      throw ConfigError ("unknown protocol '" + std::string (name) + "'");
    }
  return p;
}

std::uint32_t
ContentionWindow (int stage, const MacParams &p)
{
  if (stage < 0 || stage > p.MaxStage ())
    {
      throw std::out_of_range ("backoff stage outside [0, m]");
    }
  const std::uint64_t cw = static_cast<std::uint64_t> (p.cwMin) << stage;
  return static_cast<std::uint32_t> (std::min<std::uint64_t> (cw, p.cwMax));
}

std::uint32_t
DeterministicBackoff (int stage, const MacParams &p)
{
  const std::uint32_t cw = ContentionWindow (stage, p);
  return (cw + 1) / 2 - 1;
}

int
StageForDeterministicBackoff (std::uint32_t bd, const MacParams &p)
{
  for (int k = 0; k <= p.MaxStage (); ++k)
    {
      if (DeterministicBackoff (k, p) == bd)
        {
          return k;
        }
    }
  throw std::invalid_argument ("deterministic backoff " + std::to_string (bd)
                               + " is not on the schedule lattice");
}

std::uint32_t
Gamma (std::uint32_t bd, const MacParams &p)
{
  const std::uint32_t half = p.cwMax / 2;
  if ((half % (bd + 1)) != 0)
    {
      throw std::invalid_argument ("Gamma: bd+1 must divide cw_max/2");
    }
  return half / (bd + 1);
}

std::uint32_t
FairShareCount (int stage)
{
  if (stage < 0 || stage > 31)
    {
      throw std::out_of_range ("FairShareCount: stage out of range");
    }
  return 1u << stage;
}

std::uint32_t
FramesPerAttempt (const BackoffState &state, const Protocol &protocol)
{
  if (protocol.fairShare && protocol.UsesDeterministicBackoff ())
    {
      return FairShareCount (state.stage);
    }
  return 1;
}

BackoffState
InitialState (const Protocol &protocol, const MacParams &base, Rng &rng)
{
  const MacParams p = protocol.Effective (base);
  BackoffState s;
  s.counter = RandomCounter (0, p, rng);
  RestartWindow (s, protocol, p);
  return s;
}

BackoffState
AfterSuccess (BackoffState s, const Protocol &protocol, const MacParams &base, Rng &rng)
{
  const MacParams p = protocol.Effective (base);
  const bool wasDeterministic = s.deterministic;
  s.retries = 0;

  switch (protocol.kind)
    {
    case Protocol::Kind::Dcf:
      s.stage = 0;
      s.counter = RandomCounter (0, p, rng);
      s.deterministic = false;
      return s;

    case Protocol::Kind::Eca:
      s.stage = 0;
      s.counter = DeterministicBackoff (0, p);
      s.deterministic = true;
      return s;

    case Protocol::Kind::EcaHyst:
    case Protocol::Kind::EcaHystSr:
      break;
    }

  s.counter = CurrentBd (s, p);
  s.deterministic = true;
  s.stickinessLeft = p.defaultStickiness;
  if (!protocol.UsesScheduleReset ())
    {
      return s;
    }

  if (!s.sr || !wasDeterministic || s.sr->bitmap.size () != s.counter + 1)
    {
      // The cycle that just ended was not on the current schedule; start
      // observing from here.
      RestartWindow (s, protocol, p);
      s.sr->justChanged = false;
      s.sr->previousBd.reset ();
      return s;
    }

  s.sr->justChanged = false;
  s.sr->previousBd.reset ();
  s.sr->cursor = 0;
  ++s.sr->txSinceEval;
  if (s.sr->txSinceEval >= s.sr->gammaTarget)
    {
      s = SrEvaluate (std::move (s), protocol, base);
    }
  return s;
}

FailureResult
AfterFailure (BackoffState s, const Protocol &protocol, const MacParams &base, Rng &rng)
{
  const MacParams p = protocol.Effective (base);
  const int m = p.MaxStage ();
  ++s.retries;

  if (protocol.UsesScheduleReset ())
    {
      RevertScheduleChange (s, p);
    }

  if (s.retries > p.retryLimit)
    {
      // Frame discarded. DCF restarts from stage 0; ECA variants keep the
      // stage they reached.
      if (protocol.kind == Protocol::Kind::Dcf)
        {
          s.stage = 0;
        }
      s.retries = 0;
      s.stickinessLeft = 0;
      s.deterministic = false;
      s.counter = RandomCounter (s.stage, p, rng);
      if (protocol.UsesScheduleReset ())
        {
          RestartWindow (s, protocol, p);
        }
      return {std::move (s), true};
    }

  if (protocol.UsesHysteresis () && s.deterministic && s.stickinessLeft > 0)
    {
      --s.stickinessLeft;
      s.counter = CurrentBd (s, p);
    }
  else
    {
      s.stage = std::min (s.stage + 1, m);
      s.stickinessLeft = 0;
      s.deterministic = false;
      s.counter = RandomCounter (s.stage, p, rng);
    }

  if (protocol.UsesScheduleReset ())
    {
      // Consecutive-success window: a failure restarts observation.
      const bool justChanged = s.sr && s.sr->justChanged;
      RestartWindow (s, protocol, p);
      s.sr->justChanged = justChanged;
    }
  return {std::move (s), false};
}

SrState
SrRecordSlot (SrState sr, std::uint32_t slotIndex, bool busy)
{
  if (slotIndex >= sr.bitmap.size ())
    {
      throw std::out_of_range ("SrRecordSlot: slot index outside the bitmap");
    }
  sr.bitmap[slotIndex] |= busy ? 1 : 0;
  return sr;
}

bool
SrCandidateFree (const std::vector<std::uint8_t> &bitmap, std::uint32_t candidateBd)
{
  const std::size_t period = static_cast<std::size_t> (candidateBd) + 1;
  for (std::size_t idx = period - 1; idx < bitmap.size (); idx += period)
    {
      if (bitmap[idx] != 0)
        {
          return false;
        }
    }
  return true;
}

BackoffState
SrEvaluate (BackoffState s, const Protocol &protocol, const MacParams &base)
{
  const MacParams p = protocol.Effective (base);
  if (!s.sr)
    {
      RestartWindow (s, protocol, p);
      return s;
    }
  const std::uint32_t bd = CurrentBd (s, p);
  const int lowest = protocol.srVariant == SrVariant::Aggressive ? std::max (s.stage - 1, 0) : 0;

  for (int k = lowest; k < s.stage; ++k)
    {
      const std::uint32_t candidate = DeterministicBackoff (k, p);
      if (SrCandidateFree (s.sr->bitmap, candidate))
        {
          s.stage = k;
          s.counter = candidate;
          s.stickinessLeft += 1;
          RestartWindow (s, protocol, p);
          s.sr->justChanged = true;
          s.sr->previousBd = bd;
          return s;
        }
    }
  RestartWindow (s, protocol, p);
  return s;
}

BackoffState
OnIdleSlot (BackoffState s)
{
  RecordSlot (s, false);
  return s;
}

BackoffState
OnBusyFreeze (BackoffState s)
{
  return s;
}

BackoffState
OnBusySlot (BackoffState s)
{
  RecordSlot (s, true);
  return s;
}

void
ElapseIdleSlots (BackoffState &s, std::uint32_t n)
{
  if (n > s.counter)
    {
      throw std::logic_error ("more idle slots elapsed than the backoff counter holds");
    }
  // Idle observations leave an OR-accumulated bitmap unchanged; only the
  // cursor moves.
  s.counter -= n;
  if (s.sr)
    {
      s.sr->cursor += n;
    }
}

void
ElapseBusySlot (BackoffState &s)
{
  RecordSlot (s, true);
}

} // namespace ecasim::mac
