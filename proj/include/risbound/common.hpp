#pragma once

#include <complex>
#include <cmath>
#include <cstdint>

namespace risbound {

using Complex = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

inline constexpr Complex kImag{0.0, 1.0};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double rad) {
  double w = std::remainder(rad, kTwoPi);
  if (w <= -kPi) w += kTwoPi;
  return w;
}

// SplitMix64 step. Used to derive independent substream seeds from a run
// seed, so that draws for one sweep point never depend on sweep order.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Deterministic substream seed from a base seed and salt values.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt_a,
                                 std::uint64_t salt_b = 0, std::uint64_t salt_c = 0) {
  std::uint64_t s = splitmix64(base ^ 0x52495342ull);  // "RISB"
  s = splitmix64(s ^ salt_a);
  s = splitmix64(s ^ salt_b);
  s = splitmix64(s ^ salt_c);
  return s;
}

}  // namespace risbound
