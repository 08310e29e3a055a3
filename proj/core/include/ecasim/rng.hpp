#ifndef ECASIM_RNG_HPP
#define ECASIM_RNG_HPP

#include <cstdint>
#include <random>

namespace ecasim {

/// Stream tags used to derive independent sub-streams from a master seed.
enum class StreamTag : std::uint32_t
{
  NodeBackoff = 1,
  ScenarioPlacement = 2,
  ChannelAllocation = 3,
  Test = 99,
};

/// Seeded 64-bit Mersenne twister with portable bounded draws.
///
/// std::uniform_int_distribution is implementation defined, so the bounded
/// draws are done here to keep outputs identical across standard libraries.
class Rng
{
public:
  explicit Rng (std::uint64_t seed);

  /// Independent sub-stream keyed by (master seed, tag, index).
  static Rng Derive (std::uint64_t masterSeed, StreamTag tag, std::uint64_t index = 0);

  std::uint64_t Next () { return m_engine (); }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t UniformBelow (std::uint64_t bound);

  /// Uniform integer in [lo, hi] (inclusive).
  std::int64_t UniformInt (std::int64_t lo, std::int64_t hi);

  /// Uniform real in [0, 1) with 53 bits of resolution.
  double UniformUnit ();

  double UniformReal (double lo, double hi) { return lo + (hi - lo) * UniformUnit (); }

private:
  std::mt19937_64 m_engine;
};

} // namespace ecasim

#endif
