#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hollow {

// Deterministic random stream. The mt19937_64 engine sequence is fixed by the
// standard; the uniform/normal transforms below are our own, so a 64-bit seed
// fully determines every draw on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed)
      : eng_(splitmix64(seed)), seed_(seed) {}

  // Independent child stream (worker `stream` of this seed).
  Rng spawn(std::uint64_t stream) const {
    return Rng(splitmix64(seed_ ^ (0x9e3779b97f4a7c15ull * (stream + 1))));
  }

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; one spare value cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // +1 or -1 with equal probability.
  double rademacher() { return (eng_() & 1ull) ? 1.0 : -1.0; }

  // Integer in [0, n); modulo bias is negligible for n << 2^64.
  std::uint64_t below(std::uint64_t n) { return eng_() % n; }

 private:
  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::mt19937_64 eng_;
  std::uint64_t seed_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace hollow
