#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pressurelab/common.hpp"

namespace pressurelab {

/// Polynomial with complex coefficients, ascending degree: p[k] multiplies z^k.
using Poly = std::vector<cplx>;

inline Poly poly_trim(Poly p, double rel_tol = 1e-14) {
  double scale = 0.0;
  for (const cplx& c : p) scale = std::max(scale, std::abs(c));
  double cut = scale * rel_tol;
  while (p.size() > 1 && std::abs(p.back()) <= cut) p.pop_back();
  if (p.empty()) p.push_back(0.0);
  return p;
}

inline int poly_degree(const Poly& p) {
  for (int k = static_cast<int>(p.size()) - 1; k >= 0; --k)
    if (p[static_cast<std::size_t>(k)] != cplx(0.0)) return k;
  return 0;
}

inline cplx poly_eval(const Poly& p, cplx z) {
  cplx acc = 0.0;
  for (std::size_t k = p.size(); k-- > 0;) acc = acc * z + p[k];
  return acc;
}

/// Horner evaluation of p and p' in one sweep.
inline cplx poly_eval_deriv(const Poly& p, cplx z, cplx& dp) {
  cplx acc = 0.0, d = 0.0;
  for (std::size_t k = p.size(); k-- > 0;) {
    d = d * z + acc;
    acc = acc * z + p[k];
  }
  dp = d;
  return acc;
}

inline Poly poly_derivative(const Poly& p) {
  if (p.size() <= 1) return {cplx(0.0)};
  Poly d(p.size() - 1);
  for (std::size_t k = 1; k < p.size(); ++k) d[k - 1] = static_cast<double>(k) * p[k];
  return d;
}

inline Poly poly_add(const Poly& a, const Poly& b) {
  Poly out(std::max(a.size(), b.size()), 0.0);
  for (std::size_t k = 0; k < a.size(); ++k) out[k] += a[k];
  for (std::size_t k = 0; k < b.size(); ++k) out[k] += b[k];
  return out;
}

inline Poly poly_scale(Poly p, cplx c) {
  for (cplx& v : p) v *= c;
  return p;
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == cplx(0.0)) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

/// All complex roots of p via Aberth-Ehrlich simultaneous iteration with a
/// deterministic seeded start, each polished by Newton.  Roots are returned
/// sorted by (re, im).  Multiple roots converge to the cluster but are not
/// deflated; callers that care about separation must check it themselves.
inline std::vector<cplx> poly_roots(const Poly& input, std::uint64_t seed = 0x70726c6162u) {
  Poly p = poly_trim(input);
  int deg = static_cast<int>(p.size()) - 1;
  require(deg >= 1 || (deg == 0 && p[0] == cplx(0.0)), ErrorKind::bad_input,
          "poly_roots: nonzero constant has no roots");
  if (deg < 1) return {};
  // Normalize to a monic polynomial for stable bounds.
  Poly m(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) m[k] = p[k] / p.back();
  double cauchy = 0.0;
  for (int k = 0; k < deg; ++k) cauchy = std::max(cauchy, std::abs(m[static_cast<std::size_t>(k)]));
  double radius_hi = 1.0 + cauchy;
  double radius = std::abs(m[0]) > 0 ? std::pow(std::abs(m[0]), 1.0 / deg) : 0.5;
  radius = std::clamp(radius, 0.25, radius_hi);

  Poly dm = poly_derivative(m);
  SplitMix64 rng{seed};
  std::vector<cplx> z(static_cast<std::size_t>(deg));
  std::vector<cplx> step(static_cast<std::size_t>(deg));

  for (int restart = 0; restart < 6; ++restart) {
    for (int i = 0; i < deg; ++i) {
      double theta = kTwoPi * (i + 0.3) / deg + 0.05 * (rng.uniform() - 0.5);
      double r = radius * (1.0 + 0.02 * (rng.uniform() - 0.5) + 0.15 * restart);
      z[static_cast<std::size_t>(i)] = std::polar(r, theta);
    }
    bool converged = false;
    for (int iter = 0; iter < 400 && !converged; ++iter) {
      converged = true;
      for (int i = 0; i < deg; ++i) {
        cplx zi = z[static_cast<std::size_t>(i)];
        cplx dpv;
        cplx pv = poly_eval_deriv(m, zi, dpv);
        if (pv == cplx(0.0)) {
          step[static_cast<std::size_t>(i)] = 0.0;
          continue;
        }
        if (dpv == cplx(0.0)) dpv = cplx(1e-30, 0.0);
        cplx w = pv / dpv;
        cplx sum = 0.0;
        for (int j = 0; j < deg; ++j) {
          if (j == i) continue;
          cplx diff = zi - z[static_cast<std::size_t>(j)];
          if (diff == cplx(0.0)) diff = cplx(1e-30, 0.0);
          sum += 1.0 / diff;
        }
        cplx denom = 1.0 - w * sum;
        if (denom == cplx(0.0)) denom = cplx(1e-30, 0.0);
        cplx delta = w / denom;
        step[static_cast<std::size_t>(i)] = delta;
        if (std::abs(delta) > 1e-13 * std::max(1.0, std::abs(zi))) converged = false;
      }
      for (int i = 0; i < deg; ++i) z[static_cast<std::size_t>(i)] -= step[static_cast<std::size_t>(i)];
    }
    if (!converged) continue;
    // Newton polish on the original (monic) polynomial.
    bool all_ok = true;
    for (int i = 0; i < deg; ++i) {
      cplx& zi = z[static_cast<std::size_t>(i)];
      for (int it = 0; it < 4; ++it) {
        cplx dpv;
        cplx pv = poly_eval_deriv(m, zi, dpv);
        if (std::abs(dpv) < 1e-300) break;
        cplx delta = pv / dpv;
        zi -= delta;
        if (std::abs(delta) < 1e-15 * std::max(1.0, std::abs(zi))) break;
      }
      double bound = std::max(1.0, std::pow(std::max(1.0, std::abs(zi)), deg));
      if (!(std::abs(poly_eval(m, zi)) < 1e-9 * bound)) all_ok = false;
    }
    if (!all_ok) continue;
    std::sort(z.begin(), z.end(), [](cplx a, cplx b) {
      if (a.real() != b.real()) return a.real() < b.real();
      return a.imag() < b.imag();
    });
    return z;
  }
  fail(ErrorKind::convergence, "poly_roots: Aberth iteration did not converge");
}

}  // namespace pressurelab
