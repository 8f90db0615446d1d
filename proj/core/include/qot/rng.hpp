#pragma once

#include <cstdint>

namespace qot {

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter), so parallel consumers with distinct streams
// reproduce bit-identical values regardless of scheduling.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64();
  double next_double();   // uniform [0,1)
  double next_gaussian(); // standard normal, Box-Muller

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace qot
