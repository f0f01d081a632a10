#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace thzalloc {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;

// Error taxonomy. Everything user-facing derives from Error so the CLI can
// map solver failures and config failures to distinct exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct Infeasible : Error {
  using Error::Error;
};
struct InfeasibleFairness : Infeasible {
  using Infeasible::Infeasible;
};
struct LpInfeasible : Infeasible {
  using Infeasible::Infeasible;
};
struct NonIntegralSolution : Error {
  using Error::Error;
};
struct ZeroDistance : Error {
  using Error::Error;
};
struct EntriesOutOfRange : Error {
  using Error::Error;
};
struct TooLarge : Error {
  using Error::Error;
};
struct BracketFailure : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct RangeError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

// splitmix64; used to derive independent child seeds from a master seed so
// adding a consumer never perturbs the streams of existing ones.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Child seed for (master, drop, purpose). Purpose tags keep the position,
// fading, blockage and CSI streams independent of each other.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t drop,
                                 const std::string& purpose) {
  return mix64(master ^ mix64(drop + 0x51ed2701) ^ fnv1a(purpose));
}

// Row-major (b,s,n) flattening used by every tensor in the library.
// Matches the LP flattening i = n + N(s-1) + NS(b-1) in 1-based terms.
struct Index3 {
  int B = 0, S = 0, N = 0;
  int size() const { return B * S * N; }
  int operator()(int b, int s, int n) const { return (b * S + s) * N + n; }
};

}  // namespace thzalloc
