#pragma once

#include <cstdint>

namespace uwbloc {

// Finalizer of splitmix64. Also used on its own to mix keys into sub-stream
// seeds so that every consumer of randomness can be given an independent,
// reproducible stream.
std::uint64_t mix64(std::uint64_t x);

// Derives the seed of a named sub-stream from a master seed. Same inputs,
// same stream, on every platform.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t index = 0);

// Deterministic generator with all distributions implemented explicitly.
// The standard library's distribution classes are implementation-defined,
// which would make corpus files and simulation runs differ across
// toolchains; this one produces the same bytes everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  // [0, 1), 53-bit resolution
  double uniform();
  double uniform(double lo, double hi);
  // inclusive bounds
  int uniform_int(int lo, int hi);
  double normal(double mean = 0.0, double stddev = 1.0);
  double exponential(double mean);
  double rayleigh(double sigma);
  bool bernoulli(double p_true);

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace uwbloc
