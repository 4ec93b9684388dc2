#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace coklab {

enum class Errc {
  GroupTooLarge,
  NotInSp,
  NotASubgroup,
  NotPrimePower,
  LevelTooLow,
  TooLargeToEnumerate,
  ImaginaryResidue,
  ConstantMap,
  MissingPrime,
  NonconvergentSpec,
  BadConfig,
  Overflow,
};

class Error : public std::runtime_error {
public:
  Errc code;
  Error(Errc c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

[[noreturn]] inline void fail(Errc c, const std::string& msg) { throw Error(c, msg); }

// p^e with overflow check (throws Errc::Overflow).
inline std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp) {
  unsigned __int128 acc = 1;
  for (std::uint64_t i = 0; i < exp; ++i) {
    acc *= base;
    if (acc > static_cast<unsigned __int128>(UINT64_MAX))
      fail(Errc::Overflow, "integer power overflows 64 bits");
  }
  return static_cast<std::uint64_t>(acc);
}

inline bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t q = 2; q * q <= n; ++q)
    if (n % q == 0) return false;
  return true;
}

// m = p^d for prime p, d >= 1; returns {p, d} or throws NotPrimePower.
inline std::pair<std::uint64_t, int> prime_power_split(std::uint64_t m) {
  if (m < 2) fail(Errc::NotPrimePower, "modulus must be >= 2");
  std::uint64_t p = m;
  for (std::uint64_t q = 2; q * q <= m; ++q)
    if (m % q == 0) { p = q; break; }
  int d = 0;
  std::uint64_t t = m;
  while (t % p == 0) { t /= p; ++d; }
  if (t != 1) fail(Errc::NotPrimePower, "modulus " + std::to_string(m) + " is not a prime power");
  return {p, d};
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace coklab
