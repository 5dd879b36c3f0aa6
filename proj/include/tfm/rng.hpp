#pragma once

// Deterministic random-number plumbing for the simulator and benchmarks.
//
// Every consumer of randomness owns an independent substream whose seed is
// derived from (master seed, role, indices) with a splitmix64-style mixer.
// That keeps draws reproducible for a given master seed while making the
// streams for loadings, factor paths, and noise independent of each other
// and of how many values any one of them consumes.

#include <cstdint>
#include <random>

namespace tfm {

// Finalizer from the splitmix64 generator; a bijective 64-bit mixer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for a named substream: fold each component through the mixer so that
// nearby (role, index) pairs land in unrelated states.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t role,
                                    std::uint64_t a = 0, std::uint64_t b = 0,
                                    std::uint64_t c = 0) {
  std::uint64_t s = mix64(master ^ 0xd1b54a32d192ed03ULL);
  s = mix64(s ^ mix64(role));
  s = mix64(s ^ mix64(a));
  s = mix64(s ^ mix64(b));
  s = mix64(s ^ mix64(c));
  return s;
}

// Standard normal sampler with a pinned algorithm (Box–Muller over
// mt19937_64), so sequences do not depend on the standard library's
// distribution implementation.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1], u2 in [0, 1): 53-bit uniforms from the top engine bits.
    const double u1 =
        1.0 - static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * kPi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;

  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace tfm
