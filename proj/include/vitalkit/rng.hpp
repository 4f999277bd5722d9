#pragma once

#include <cstdint>
#include <limits>

namespace vitalkit {

// Immutable stream descriptor. Every consumer derives its own engine from it,
// so (seed, stream_id) fully determines a sample sequence.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  // Child stream for work item `index` (path, node, optimizer start...).
  RngStream substream(std::uint64_t index) const;
};

std::uint64_t splitmix64(std::uint64_t& state);

// xoshiro256** engine; satisfies UniformRandomBitGenerator so it plugs into
// the <random> distributions.
class Engine {
 public:
  using result_type = std::uint64_t;

  explicit Engine(const RngStream& stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  // Uniform on the open interval (0, 1).
  double uniform();

 private:
  std::uint64_t s_[4];
};

}  // namespace vitalkit
