#include "mams/rng.hpp"

#include "mams/dist.hpp"

namespace mams {

namespace {

constexpr std::uint64_t kPhiloxMul = 0xD2B74407B1CE6E93ULL;
constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ULL;

inline void philox_round(std::uint64_t& c0, std::uint64_t& c1, std::uint64_t key) {
  const unsigned __int128 prod = static_cast<unsigned __int128>(c0) * kPhiloxMul;
  const std::uint64_t hi = static_cast<std::uint64_t>(prod >> 64);
  const std::uint64_t lo = static_cast<std::uint64_t>(prod);
  c0 = hi ^ key ^ c1;
  c1 = lo;
}

}  // namespace

std::array<std::uint64_t, 2> philox2x64(std::uint64_t seed, std::uint64_t substream,
                                        std::uint64_t block) {
  std::uint64_t c0 = substream;
  std::uint64_t c1 = block;
  std::uint64_t key = seed;
  for (int round = 0; round < 10; ++round) {
    philox_round(c0, c1, key);
    key += kWeyl;
  }
  return {c0, c1};
}

double normal_from_word(std::uint64_t word) {
  // 53-bit mantissa, bin centre keeps u strictly inside (0,1).
  const double u = (static_cast<double>(word >> 11) + 0.5) * 0x1.0p-53;
  return std_normal_quantile(u);
}

double RngStream::at(std::uint64_t index) const {
  const auto words = philox2x64(seed, substream, index >> 1);
  return normal_from_word(words[index & 1]);
}

double RngStream::next() {
  const double z = at(position);
  ++position;
  return z;
}

std::vector<double> draw_std_normal(RngStream& stream, std::size_t count) {
  std::vector<double> out(count);
  draw_std_normal(stream, count, out.data());
  return out;
}

void draw_std_normal(RngStream& stream, std::size_t count, double* out) {
  std::uint64_t pos = stream.position;
  std::size_t i = 0;
  if ((pos & 1) != 0 && i < count) {
    out[i++] = stream.at(pos++);
  }
  while (i + 2 <= count) {
    const auto words = philox2x64(stream.seed, stream.substream, pos >> 1);
    out[i++] = normal_from_word(words[0]);
    out[i++] = normal_from_word(words[1]);
    pos += 2;
  }
  if (i < count) {
    out[i++] = stream.at(pos++);
  }
  stream.position = pos;
}

std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double UniformStream::next_uniform() {
  const auto words = philox2x64(s.seed, s.substream, s.position >> 1);
  const std::uint64_t w = words[s.position & 1];
  ++s.position;
  return (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace mams
