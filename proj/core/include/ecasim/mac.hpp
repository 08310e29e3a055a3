#ifndef ECASIM_MAC_HPP
#define ECASIM_MAC_HPP

#include "ecasim/rng.hpp"
#include "ecasim/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ecasim::mac {

struct MacParams
{
  std::uint32_t cwMin = 16;
  std::uint32_t cwMax = 1024;
  std::uint32_t retryLimit = 7;
  Micros slotUs = 9;
  Micros difsUs = 34;
  Micros sifsUs = 16;
  std::uint32_t defaultStickiness = 1;

  /// m such that cwMax = 2^m * cwMin.
  int MaxStage () const;

  /// Throws ConfigError unless cwMin and cwMax are powers of two with
  /// cwMin <= cwMax, retryLimit >= 1 and all durations are positive.
  void Validate () const;
};

enum class SrVariant
{
  Conservative,
  Aggressive,
};

/// Channel access protocol run by a station.
struct Protocol
{
  enum class Kind
  {
    Dcf,
    Eca,
    EcaHyst,
    EcaHystSr,
  };

  Kind kind = Kind::Dcf;
  SrVariant srVariant = SrVariant::Conservative;
  /// Replaces cwMax for this protocol (e.g. 256 for the reduced-window SR
  /// configuration). Must be a power of two between cwMin and cwMax.
  std::optional<std::uint32_t> reducedCwMax;
  /// Aggregate 2^k payloads per attempt at stage k.
  bool fairShare = false;

  static Protocol Dcf () { return Of (Kind::Dcf); }
  static Protocol Eca () { return Of (Kind::Eca); }
  static Protocol EcaHyst () { return Of (Kind::EcaHyst); }
  static Protocol EcaHystSr (SrVariant v = SrVariant::Conservative,
                             std::optional<std::uint32_t> reduced = std::nullopt)
  {
    Protocol p = Of (Kind::EcaHystSr);
    p.srVariant = v;
    p.reducedCwMax = reduced;
    return p;
  }
  static Protocol Of (Kind k)
  {
    Protocol p;
    p.kind = k;
    return p;
  }

  bool UsesDeterministicBackoff () const { return kind != Kind::Dcf; }
  bool UsesHysteresis () const { return kind == Kind::EcaHyst || kind == Kind::EcaHystSr; }
  bool UsesScheduleReset () const { return kind == Kind::EcaHystSr; }

  /// Parameters as seen by this protocol (reduced cwMax applied).
  MacParams Effective (const MacParams &base) const;

  void Validate (const MacParams &base) const;

  /// Canonical short name, e.g. "dcf", "eca_hyst_sr", "eca_hyst_sr_aggr",
  /// "eca_hyst_sr_r256", with a "_fs" suffix when Fair Share is on.
  std::string Name () const;

  /// Inverse of Name(). "eca_hyst_sr_r" is accepted as "eca_hyst_sr_r256".
  /// Throws ConfigError on unknown names.
  static Protocol Parse (std::string_view name);

  bool operator== (const Protocol &) const = default;
};

/// Schedule Reset observation window. bitmap[i] is 1 if the i-th countdown
/// slot after the node's own transmission was ever seen busy during the
/// window; own transmission slots are never recorded.
struct SrState
{
  std::vector<std::uint8_t> bitmap;
  std::uint32_t txSinceEval = 0;
  std::uint32_t gammaTarget = 1;
  bool justChanged = false;
  std::optional<std::uint32_t> previousBd;
  /// Offset of the next countdown slot since the last own transmission.
  std::uint32_t cursor = 0;

  bool operator== (const SrState &) const = default;
};

struct BackoffState
{
  int stage = 0;
  std::uint32_t counter = 0;
  std::uint32_t retries = 0;
  std::uint32_t stickinessLeft = 0;
  bool deterministic = false;
  std::optional<SrState> sr;

  bool operator== (const BackoffState &) const = default;
};

/// min(2^k * cwMin, cwMax). Throws std::out_of_range for k outside [0, m].
std::uint32_t ContentionWindow (int stage, const MacParams &p);

/// ceil(CW(k)/2) - 1.
std::uint32_t DeterministicBackoff (int stage, const MacParams &p);

/// Stage whose deterministic backoff equals bd. Throws std::invalid_argument
/// if bd is not on the schedule lattice.
int StageForDeterministicBackoff (std::uint32_t bd, const MacParams &p);

/// Number of transmissions between Schedule Reset evaluations:
/// (cwMax/2)/(bd+1).
std::uint32_t Gamma (std::uint32_t bd, const MacParams &p);

/// 2^k payloads per attempt under Fair Share.
std::uint32_t FairShareCount (int stage);

/// Payloads carried by the next attempt of a node in `state`.
std::uint32_t FramesPerAttempt (const BackoffState &state, const Protocol &protocol);

/// Fresh state for a saturated node: stage 0, random counter.
BackoffState InitialState (const Protocol &protocol, const MacParams &base, Rng &rng);

/// Transition after an acknowledged transmission.
BackoffState AfterSuccess (BackoffState state, const Protocol &protocol, const MacParams &base,
                           Rng &rng);

struct FailureResult
{
  BackoffState state;
  /// The retry limit was exceeded and the frame was discarded.
  bool dropped = false;
};

/// Transition after an unacknowledged transmission.
FailureResult AfterFailure (BackoffState state, const Protocol &protocol, const MacParams &base,
                            Rng &rng);

/// OR-accumulate one slot observation into the bitmap. Throws
/// std::out_of_range if slotIndex is outside the bitmap.
SrState SrRecordSlot (SrState sr, std::uint32_t slotIndex, bool busy);

/// True if every slot the node would newly transmit in under a schedule of
/// candidateBd was observed idle: bitmap[j*(candidateBd+1)-1] == 0 for all
/// j >= 1 inside the bitmap.
bool SrCandidateFree (const std::vector<std::uint8_t> &bitmap, std::uint32_t candidateBd);

/// Evaluate the Schedule Reset bitmap and possibly shrink the deterministic
/// backoff. The caller decides when the window is complete; AfterSuccess does
/// so after gammaTarget deterministic transmissions. Always restarts the
/// observation window.
BackoffState SrEvaluate (BackoffState state, const Protocol &protocol, const MacParams &base);

/// An idle backoff slot elapsed: counter - 1, slot recorded as idle.
/// Throws std::logic_error at counter 0 (the node should have transmitted).
BackoffState OnIdleSlot (BackoffState state);

/// The medium is sensed busy during the countdown: the counter holds.
BackoffState OnBusyFreeze (BackoffState state);

/// A busy period followed by DIFS of idle medium elapsed. It counts as one
/// contention slot: counter - 1, slot recorded as busy. Throws
/// std::logic_error at counter 0.
BackoffState OnBusySlot (BackoffState state);

/// In-place forms used by the engine. ElapseIdleSlots(s, n) is n
/// consecutive OnIdleSlot steps; it throws std::logic_error if n > counter.
void ElapseIdleSlots (BackoffState &state, std::uint32_t n);
void ElapseBusySlot (BackoffState &state);

} // namespace ecasim::mac

#endif
