#ifndef ECASIM_STATS_HPP
#define ECASIM_STATS_HPP

#include <cstdint>

namespace ecasim {

/// Raw per-node counters. attempts = successes + failures + inFlight; a
/// dropped frame's last attempt is counted as a failure and as a drop.
struct PerNodeStats
{
  std::uint64_t successes = 0;
  std::uint64_t failures = 0;
  std::uint64_t drops = 0;
  std::uint64_t attempts = 0;
  std::uint64_t deliveredBytes = 0;
  /// 1 if an attempt was still unresolved when the run ended.
  std::uint32_t inFlight = 0;

  PerNodeStats &operator+= (const PerNodeStats &o)
  {
    successes += o.successes;
    failures += o.failures;
    drops += o.drops;
    attempts += o.attempts;
    deliveredBytes += o.deliveredBytes;
    inFlight += o.inFlight;
    return *this;
  }

  bool operator== (const PerNodeStats &) const = default;
};

} // namespace ecasim

#endif
