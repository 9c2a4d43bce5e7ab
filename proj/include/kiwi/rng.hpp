#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace kiwi {

/// Seedable generator used for every randomized procedure.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Bounded integers and unit doubles are derived here rather than
/// through <random> distributions, whose algorithms differ between standard
/// libraries, so a seed replays identically on any platform.
class Rng {
public:
  static constexpr std::string_view algorithm = "mt19937_64/splitmix64-derive/lemire-bounded";

  explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

  /// Child generator for stream `index`; independent of draw order on the parent.
  static Rng derive(std::uint64_t seed, std::uint64_t index) {
    return Rng(mix(seed) ^ mix(index + 0x632be59bd9b4e019ULL));
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    // Lemire's multiply-shift with rejection.
    unsigned __int128 product = static_cast<unsigned __int128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(product);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        product = static_cast<unsigned __int128>(next()) * bound;
        low = static_cast<std::uint64_t>(product);
      }
    }
    return static_cast<std::uint64_t>(product >> 64);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace kiwi
