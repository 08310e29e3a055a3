#include "ecasim/rng.hpp"
#include "ecasim/types.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ecasim {

double
Distance (const Position &a, const Position &b)
{
  return std::hypot (a.x - b.x, a.y - b.y, a.z - b.z);
}

bool
IsValid (const Position &p)
{
  return std::isfinite (p.x) && std::isfinite (p.y) && std::isfinite (p.z) && p.z >= 0.0;
}

Rng::Rng (std::uint64_t seed)
  : m_engine (seed)
{
}

Rng
Rng::Derive (std::uint64_t masterSeed, StreamTag tag, std::uint64_t index)
{
  // seed_seq output is fully specified by the standard, unlike the
  // distributions, so derived streams are portable.
  std::seed_seq seq{static_cast<std::uint32_t> (masterSeed),
                    static_cast<std::uint32_t> (masterSeed >> 32),
                    static_cast<std::uint32_t> (tag),
                    static_cast<std::uint32_t> (index),
                    static_cast<std::uint32_t> (index >> 32)};
  std::uint32_t words[2];
  seq.generate (words, words + 2);
  return Rng ((static_cast<std::uint64_t> (words[0]) << 32) | words[1]);
}

std::uint64_t
Rng::UniformBelow (std::uint64_t bound)
{
  if (bound == 0)
    {
      throw std::invalid_argument ("Rng::UniformBelow: bound must be positive");
    }
  // Rejection sampling on the largest multiple of bound.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max ()
                              - std::numeric_limits<std::uint64_t>::max () % bound;
  std::uint64_t r;
  do
    {
      r = m_engine ();
    }
  while (r >= limit);
  return r % bound;
}

std::int64_t
Rng::UniformInt (std::int64_t lo, std::int64_t hi)
{
  if (hi < lo)
    {
      throw std::invalid_argument ("Rng::UniformInt: empty range");
    }
  return lo + static_cast<std::int64_t> (UniformBelow (static_cast<std::uint64_t> (hi - lo) + 1));
}

double
Rng::UniformUnit ()
{
  return static_cast<double> (m_engine () >> 11) * 0x1.0p-53;
}

} // namespace ecasim
