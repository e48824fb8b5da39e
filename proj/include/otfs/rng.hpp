#pragma once

#include <cstdint>
#include <random>

namespace otfs {

using Rng = std::mt19937_64;

/// Independent purposes drawn within one Monte Carlo frame.
enum class Stream : std::uint32_t { Bits = 1, Channel = 2, Noise = 3, Network = 4 };

/// Substream for (seed, frame, purpose). Depends only on its arguments, so
/// results do not change with worker count or scheduling order.
inline Rng make_stream(std::uint64_t seed, std::uint64_t frame, Stream purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(frame), static_cast<std::uint32_t>(frame >> 32),
                    static_cast<std::uint32_t>(purpose)};
  return Rng(seq);
}

}  // namespace otfs
