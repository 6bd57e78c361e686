#pragma once

/**
 * Seed derivation and uniform sampling.
 *
 * All randomness flows through engine streams derived from one root seed,
 * so a run is bit-reproducible regardless of scheduling. uniform01 maps one
 * engine output to a double in [0, 1) the same way on every platform
 * (std::uniform_real_distribution is implementation-defined, so we avoid it).
 */

#include <cstdint>
#include <random>

namespace rsd {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Child seed for a named stream of a root seed. Streams with distinct ids are
// independent for practical purposes.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  return splitmix64(root ^ splitmix64(stream + 1));
}

// Fixed stream ids used by the engine.
namespace stream {
inline constexpr std::uint64_t kAccept = 0;
inline constexpr std::uint64_t kDraft = 1;
inline constexpr std::uint64_t kTarget = 2;
inline constexpr std::uint64_t kTrajectoryBase = 1'000'000;
}  // namespace stream

// Counter-mode splitmix64 engine. Decodes create several short-lived streams
// each, and a mersenne twister pays a ~3us state-block cost per construction;
// this engine is two stores to build and a few multiplies per draw, which
// keeps the 1e5-trial Monte-Carlo campaigns inside their time budgets.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  explicit StreamRng(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ull; }

  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Per-trajectory root seed for batch runs: index i gets its own stream no
// matter how the harness schedules it.
inline std::uint64_t trajectory_seed(std::uint64_t root, std::uint64_t index) {
  return derive_seed(root, stream::kTrajectoryBase + index);
}

// One engine draw -> double in [0, 1), 53 mantissa bits.
template <class Rng>
double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Wrapper that counts engine invocations; used to assert that deterministic
// acceptance branches consume zero draws.
template <class Rng>
class CountingRng {
 public:
  using result_type = typename Rng::result_type;
  explicit CountingRng(result_type seed) : rng_(seed) {}

  static constexpr result_type min() { return Rng::min(); }
  static constexpr result_type max() { return Rng::max(); }

  result_type operator()() {
    ++draws_;
    return rng_();
  }

  std::uint64_t draws() const { return draws_; }

 private:
  Rng rng_;
  std::uint64_t draws_ = 0;
};

using CountingRng64 = CountingRng<std::mt19937_64>;

}  // namespace rsd
