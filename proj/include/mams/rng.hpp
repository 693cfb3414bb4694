#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace mams {

// Philox2x64-10 keyed counter permutation. Purely arithmetic, so the output
// for a given (seed, substream, block) is identical on every platform, and
// distinct substream indices can never collide: they occupy disjoint halves
// of the counter space.
std::array<std::uint64_t, 2> philox2x64(std::uint64_t seed, std::uint64_t substream,
                                        std::uint64_t block);

// Map one 64-bit word to a standard normal deviate by inverting the normal
// CDF at the centre of the word's 2^-53 probability bin.
double normal_from_word(std::uint64_t word);

// A deterministic stream of N(0,1) deviates. Single-owner: parallel code
// derives one stream per (replicate, arm) instead of sharing.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t substream = 0;
  std::uint64_t position = 0;  // deviates drawn so far

  // Deviate at an absolute position, independent of the cursor.
  double at(std::uint64_t index) const;

  double next();
  void skip(std::uint64_t count) { position += count; }
};

// Draws `count` deviates and advances the stream cursor.
std::vector<double> draw_std_normal(RngStream& stream, std::size_t count);
void draw_std_normal(RngStream& stream, std::size_t count, double* out);

// Cheap 64-bit mixer for deriving auxiliary seeds (bank seed -> CE seed etc).
std::uint64_t mix64(std::uint64_t x);

// Uniform variate in (0,1) from a stream of its own; used by the optimizer's
// proposal sampler.
struct UniformStream {
  RngStream s;
  double next_uniform();
};

}  // namespace mams
