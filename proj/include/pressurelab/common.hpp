#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pressurelab {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Error taxonomy. The CLI maps kinds to exit codes: bad_input -> 1,
/// convergence/diagnostic/tracking/domain -> 2, resource -> 4.
enum class ErrorKind {
  bad_input,    // malformed or out-of-contract input
  resource,     // enumeration/iteration cap exceeded
  convergence,  // an iterative solver failed to converge
  diagnostic,   // two estimators disagree beyond tolerance
  tracking,     // numerical continuation lost the object it was following
  domain,       // operation applied to an object outside its domain
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind k, const std::string& msg) {
  throw Error(k, msg);
}

inline void require(bool ok, ErrorKind k, const std::string& msg) {
  if (!ok) fail(k, msg);
}

/// splitmix64: tiny deterministic generator, identical output on every
/// platform.  Used wherever a seed influences results (root-finder starts,
/// sampled directions) so that reports are reproducible byte for byte.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Uniform point on the unit circle.
  cplx unit() {
    double t = uniform(0.0, kTwoPi);
    return {std::cos(t), std::sin(t)};
  }

  /// Gaussian-ish isotropic complex number (Box-Muller).
  cplx gaussian() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    double r = std::sqrt(-2.0 * std::log(u1));
    return {r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2)};
  }
};

/// Reduce x into [0, 2*pi).
inline double mod_two_pi(double x) {
  double y = std::fmod(x, kTwoPi);
  if (y < 0) y += kTwoPi;
  return y;
}

}  // namespace pressurelab
