#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pressurelab/common.hpp"
#include "pressurelab/continuation.hpp"
#include "pressurelab/maps.hpp"
#include "pressurelab/parallel.hpp"
#include "pressurelab/thermo.hpp"

namespace pressurelab {

// ---------------------------------------------------------------------------
// Dynamical-determinant pressure for the geometric potential -s log|f'| on a
// quasi-circle Julia set.  The determinant expands as D(u,s) = 1 + sum a_k u^k
// via the standard trace recursion and P(s) = -log|u*(s)| at the zero of
// smallest modulus.  Two trace kernels are used: when every multiplier is
// nearly positive real the single-power kernel 1 - |lambda|^{-m/p} applies
// (the expansion of an analytic circle system, with coefficients decaying
// like exp(-c k^2)); otherwise the squared-distance kernel |1 - lambda^{-m/p}|^2
// of the two-variable extension.  Both estimate the same pressure, which
// depends on the multiplier moduli only.

struct TraceOrbit {
  int period = 0;
  double log_mag = 0.0;  // log|lambda_C| > 0
  double arg = 0.0;      // arg(lambda_C)
  double aux = 0.0;      // optional extra Birkhoff weight per traversal
};

struct MultiplierTable {
  int max_period = 0;
  std::vector<TraceOrbit> orbits;
  bool near_circle = false;  // all multipliers nearly positive real
};

inline MultiplierTable multiplier_table(const std::vector<Cycle>& cycles, int max_period) {
  require(max_period >= 2, ErrorKind::bad_input, "multiplier table: need periods up to at least 2");
  MultiplierTable tab;
  tab.max_period = max_period;
  double max_arg = 0.0;
  for (const Cycle& c : cycles) {
    if (c.period > max_period) continue;
    double mag = std::abs(c.multiplier);
    require(mag > 1.0, ErrorKind::domain,
            "multiplier table: non-repelling cycle in the inventory (|lambda| <= 1)");
    tab.orbits.push_back({c.period, std::log(mag), std::arg(c.multiplier)});
    max_arg = std::max(max_arg, std::abs(std::arg(c.multiplier)));
  }
  require(!tab.orbits.empty(), ErrorKind::bad_input, "multiplier table: no cycles");
  tab.near_circle = max_arg <= 0.1;
  return tab;
}

namespace detail {

struct DetCoeffs {
  std::vector<double> a;   // a_0 .. a_N of det(1 - u L_s)
  std::vector<double> da;  // d/ds of the same
};

inline DetCoeffs det_coeffs(const MultiplierTable& tab, double s, double h = 0.0) {
  int N = tab.max_period;
  std::vector<double> tr(static_cast<std::size_t>(N) + 1, 0.0);
  std::vector<double> dtr(static_cast<std::size_t>(N) + 1, 0.0);
  for (const TraceOrbit& o : tab.orbits) {
    for (int m = o.period; m <= N; m += o.period) {
      double r = static_cast<double>(m) / o.period;
      double rho = std::exp(-r * o.log_mag);  // |lambda|^{-m/p}
      double denom = tab.near_circle
                         ? 1.0 - rho
                         : 1.0 - 2.0 * rho * std::cos(r * o.arg) + rho * rho;
      double term = o.period * std::exp(r * (h * o.aux - s * o.log_mag)) / denom;
      tr[static_cast<std::size_t>(m)] += term;
      dtr[static_cast<std::size_t>(m)] -= r * o.log_mag * term;
    }
  }
  DetCoeffs c;
  c.a.assign(static_cast<std::size_t>(N) + 1, 0.0);
  c.da.assign(static_cast<std::size_t>(N) + 1, 0.0);
  c.a[0] = 1.0;
  for (int k = 1; k <= N; ++k) {
    double acc = 0.0, dacc = 0.0;
    for (int j = 1; j <= k; ++j) {
      acc += tr[static_cast<std::size_t>(j)] * c.a[static_cast<std::size_t>(k - j)];
      dacc += dtr[static_cast<std::size_t>(j)] * c.a[static_cast<std::size_t>(k - j)] +
              tr[static_cast<std::size_t>(j)] * c.da[static_cast<std::size_t>(k - j)];
    }
    c.a[static_cast<std::size_t>(k)] = -acc / k;
    c.da[static_cast<std::size_t>(k)] = -dacc / k;
  }
  return c;
}

inline double det_eval(const DetCoeffs& c, double u, double* d_du = nullptr,
                       double* d_ds = nullptr) {
  double value = 0.0, slope = 0.0, sval = 0.0;
  for (std::size_t k = c.a.size(); k-- > 0;) {
    slope = slope * u + value;  // Horner pair: derivative rides along
    value = value * u + c.a[k];
    sval = sval * u + c.da[k];
  }
  if (d_du) *d_du = slope;
  if (d_ds) *d_ds = sval;
  return value;
}

inline cplx det_eval_c(const std::vector<double>& a, cplx u, cplx* d_du = nullptr) {
  cplx value = 0.0, slope = 0.0;
  for (std::size_t k = a.size(); k-- > 0;) {
    slope = slope * u + value;
    value = value * u + a[k];
  }
  if (d_du) *d_du = slope;
  return value;
}

/// Smallest-modulus zero of D(u) = sum_k a_k u^k with a_0 = 1.  The leading
/// zero of the full determinant is simple and positive real; truncation can
/// split it into a conjugate pair just off the axis.  A real-axis scan picks
/// up the generic sign change, and a Muller iteration seeded at the scan
/// minimum recovers the pair when no crossing exists.
inline cplx det_root(const std::vector<double>& a) {
  auto ev = [&](double x) {
    double v = 0.0;
    for (std::size_t k = a.size(); k-- > 0;) v = v * x + a[k];
    return v;
  };
  double lo = 0.0, prev = 1.0;  // D(0) = a_0 = 1
  double u_min = 1e-4, v_min = std::numeric_limits<double>::infinity();
  for (double hi = 1e-4; hi <= 1e7; hi *= 1.05) {
    double v = ev(hi);
    if (prev > 0.0 && v <= 0.0) {
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double d = ev(mid);
        if (d > 0.0)
          lo = mid;
        else
          hi = mid;
        if (hi - lo <= 1e-16 * std::max(1.0, hi)) break;
      }
      return cplx(0.5 * (lo + hi), 0.0);
    }
    if (std::abs(v) < v_min) {
      v_min = std::abs(v);
      u_min = hi;
    }
    lo = hi;
    prev = v;
  }
  // No real crossing: chase the complex pair from the dip.
  cplx x0 = u_min * 0.98, x1 = u_min * 1.01, x2 = cplx(u_min, 0.02 * u_min);
  cplx f0 = det_eval_c(a, x0), f1 = det_eval_c(a, x1), f2 = det_eval_c(a, x2);
  for (int it = 0; it < 80; ++it) {
    cplx q = (x2 - x1) / (x1 - x0);
    cplx A = q * f2 - q * (1.0 + q) * f1 + q * q * f0;
    cplx B = (2.0 * q + 1.0) * f2 - (1.0 + q) * (1.0 + q) * f1 + q * q * f0;
    cplx C = (1.0 + q) * f2;
    cplx disc = std::sqrt(B * B - 4.0 * A * C);
    cplx den = std::abs(B + disc) > std::abs(B - disc) ? B + disc : B - disc;
    if (den == cplx(0.0)) break;
    cplx x3 = x2 - (x2 - x1) * (2.0 * C / den);
    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = f2;
    x2 = x3;
    f2 = det_eval_c(a, x3);
    if (std::abs(x2 - x1) <= 1e-14 * std::abs(x2)) break;
  }
  for (int it = 0; it < 8; ++it) {  // Newton polish
    cplx d;
    cplx v = det_eval_c(a, x2, &d);
    if (std::abs(d) < 1e-300) break;
    cplx step = v / d;
    x2 -= step;
    if (std::abs(step) <= 1e-15 * std::abs(x2)) break;
  }
  double scale = 0.0, pw = 1.0, r = std::abs(x2);
  for (double ak : a) {
    scale += std::abs(ak) * pw;
    pw *= r;
  }
  require(std::abs(det_eval_c(a, x2)) <= 1e-8 * scale, ErrorKind::convergence,
          "det_pressure: determinant zero not located");
  require(x2.real() > 0.0 && std::abs(x2.imag()) <= 0.5 * r, ErrorKind::convergence,
          "det_pressure: leading determinant zero strays from the positive real axis");
  if (x2.imag() < 0.0) x2 = std::conj(x2);
  return x2;
}

}  // namespace detail

struct PressureEval {
  double value = 0.0;  // P(s) = -log|u*|
  double d_ds = 0.0;   // dP/ds = -(equilibrium Lyapunov exponent), negative
  double u_star = 0.0;
};

/// Pressure of -s log|f'| + h * aux from the determinant zero of smallest
/// modulus, with dP/ds by implicit differentiation at the zero.
inline PressureEval det_pressure(const MultiplierTable& tab, double s, double h = 0.0) {
  detail::DetCoeffs coeffs = detail::det_coeffs(tab, s, h);
  cplx u = detail::det_root(coeffs.a);
  PressureEval out;
  out.u_star = std::abs(u);
  out.value = -std::log(out.u_star);
  cplx d_du;
  detail::det_eval_c(coeffs.a, u, &d_du);
  double scale = 0.0, pw = 1.0;
  for (double ak : coeffs.a) {
    scale += std::abs(ak) * pw;
    pw *= out.u_star;
  }
  if (std::abs(d_du) * out.u_star > 1e-9 * scale) {
    cplx d_ds = detail::det_eval_c(coeffs.da, u);
    out.d_ds = -std::real(-d_ds / d_du / u);
  } else {
    // Nearly colliding pair: implicit differentiation is ill-posed, fall back
    // to a centered difference in s.
    double hs = 1e-6;
    double p_hi = -std::log(std::abs(detail::det_root(detail::det_coeffs(tab, s + hs, h).a)));
    double p_lo = -std::log(std::abs(detail::det_root(detail::det_coeffs(tab, s - hs, h).a)));
    out.d_ds = (p_hi - p_lo) / (2.0 * hs);
  }
  return out;
}

struct DimensionResult {
  double delta = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  int period_used = 0;
  int newton_iters = 0;
  double residual = 0.0;  // |P(-delta log|f'|)|
};

/// Solves the dimension equation P(-s log|f'|) = 0 on the bracket
/// s in [0.5, 2.5]: a 10-point strict-monotonicity check, bisection, then
/// Newton with derivative dP/ds (minus the equilibrium Lyapunov exponent).
inline DimensionResult bowen_dimension(const MultiplierTable& tab) {
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10; ++i) {
    double s = 0.5 + 2.0 * i / 9.0;
    double p = det_pressure(tab, s).value;
    require(p < prev, ErrorKind::domain,
            "bowen_dimension: pressure is not strictly decreasing in s (bad cycle data)");
    prev = p;
  }
  double lo = 0.5, hi = 2.5;
  double p_lo = det_pressure(tab, lo).value;
  double p_hi = det_pressure(tab, hi).value;
  require(p_lo > 0.0 && p_hi < 0.0, ErrorKind::convergence,
          "bowen_dimension: P does not change sign on [0.5, 2.5] (bad cycle data)");
  for (int it = 0; it < 20; ++it) {
    double mid = 0.5 * (lo + hi);
    if (det_pressure(tab, mid).value > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  DimensionResult out;
  out.period_used = tab.max_period;
  double s = 0.5 * (lo + hi);
  double residual = std::numeric_limits<double>::infinity();
  int iters = 0;
  for (; iters < 30; ++iters) {
    PressureEval p = det_pressure(tab, s);
    residual = std::abs(p.value);
    if (p.value > 0.0)
      lo = s;
    else
      hi = s;
    if (residual <= 1e-13) break;
    double newton = s - p.value / p.d_ds;
    s = (newton > lo && newton < hi) ? newton : 0.5 * (lo + hi);
  }
  {
    PressureEval p = det_pressure(tab, s);
    residual = std::abs(p.value);
  }
  require(residual < 1e-10, ErrorKind::convergence,
          "bowen_dimension: Newton stalled above the residual tolerance");
  out.delta = s;
  out.lo = lo;
  out.hi = hi;
  out.newton_iters = iters;
  out.residual = residual;
  return out;
}

/// Equilibrium Lyapunov exponent at exponent s, read off the determinant.
inline double lyapunov_exponent(const MultiplierTable& tab, double s) {
  return -det_pressure(tab, s).d_ds;
}

namespace detail {

/// Central moments of Birkhoff sums over the level-n Gibbs weights
/// w_O = p e^{(n/p) s_phi} on orbits whose period divides n.
struct LevelMoments {
  double mean_rate[2] = {0.0, 0.0};  // (1/n) E[S_n psi_k]
  double var[2] = {0.0, 0.0};        // E[(S_n psi_k - mean)^2]
  double cov = 0.0;
  int count = 0;
};

inline LevelMoments level_moments(const std::vector<OrbitSample>& orbits, int n_psi, int n) {
  double m = -std::numeric_limits<double>::infinity();
  for (const OrbitSample& o : orbits)
    if (n % o.period == 0) m = std::max(m, static_cast<double>(n) / o.period * o.s_phi);
  require(std::isfinite(m), ErrorKind::domain, "level moments: no orbits divide the level");
  LevelMoments out;
  double z = 0.0, first[2] = {0.0, 0.0};
  for (const OrbitSample& o : orbits) {
    if (n % o.period != 0) continue;
    double reps = static_cast<double>(n) / o.period;
    double w = o.period * std::exp(reps * o.s_phi - m);
    z += w;
    for (int k = 0; k < n_psi; ++k) first[k] += w * reps * o.s_psi[static_cast<std::size_t>(k)];
    ++out.count;
  }
  double mean[2] = {first[0] / z, n_psi > 1 ? first[1] / z : 0.0};
  double sec[2] = {0.0, 0.0}, cross = 0.0;
  for (const OrbitSample& o : orbits) {
    if (n % o.period != 0) continue;
    double reps = static_cast<double>(n) / o.period;
    double w = o.period * std::exp(reps * o.s_phi - m);
    double d[2] = {reps * o.s_psi[0] - mean[0],
                   n_psi > 1 ? reps * o.s_psi[1] - mean[1] : 0.0};
    sec[0] += w * d[0] * d[0];
    if (n_psi > 1) {
      sec[1] += w * d[1] * d[1];
      cross += w * d[0] * d[1];
    }
  }
  for (int k = 0; k < n_psi; ++k) {
    out.mean_rate[k] = mean[k] / n;
    out.var[k] = sec[k] / z;
  }
  out.cov = cross / z;
  return out;
}

/// Asymptotic variance of the observable in `aux` (per-traversal Birkhoff
/// sums, centered by the caller) at exponent s, via a centered second
/// difference of the determinant pressure in the weight direction.
inline double det_fd_variance(MultiplierTable tab, const std::vector<double>& aux, double s) {
  double sup_rate = 0.0;
  for (std::size_t i = 0; i < tab.orbits.size(); ++i) {
    tab.orbits[i].aux = aux[i];
    sup_rate = std::max(sup_rate, std::abs(aux[i]) / tab.orbits[i].period);
  }
  double h = 1e-3 / std::max(1.0, sup_rate);
  double p0 = det_pressure(tab, s).value;
  double pp = det_pressure(tab, s, h).value;
  double pm = det_pressure(tab, s, -h).value;
  return (pp - 2.0 * p0 + pm) / (h * h);
}

inline cplx det_eval_c2(const std::vector<double>& a, cplx u, cplx* d_du, cplx* d_duu) {
  cplx value = 0.0, d1 = 0.0, d2 = 0.0;
  for (std::size_t k = a.size(); k-- > 0;) {
    d2 = d2 * u + d1;
    d1 = d1 * u + value;
    value = value * u + a[k];
  }
  *d_du = d1;
  *d_duu = 2.0 * d2;
  return value;
}

/// Pressure of -s log|f'| + h * aux together with its first and second
/// derivatives in h at h = 0, all by implicit differentiation at the
/// determinant zero.  The second derivative is the asymptotic variance of
/// the (centered) observable under the equilibrium state.
struct CurvatureEval {
  double pressure = 0.0;
  double slope = 0.0;
  double curvature = 0.0;
};

inline CurvatureEval det_curvature(MultiplierTable tab, const std::vector<double>& aux,
                                   double s) {
  for (std::size_t i = 0; i < tab.orbits.size(); ++i) tab.orbits[i].aux = aux[i];
  int N = tab.max_period;
  std::vector<double> tr(static_cast<std::size_t>(N) + 1, 0.0);
  std::vector<double> tr1(static_cast<std::size_t>(N) + 1, 0.0);
  std::vector<double> tr2(static_cast<std::size_t>(N) + 1, 0.0);
  for (const TraceOrbit& o : tab.orbits) {
    for (int m = o.period; m <= N; m += o.period) {
      double r = static_cast<double>(m) / o.period;
      double rho = std::exp(-r * o.log_mag);
      double denom = tab.near_circle
                         ? 1.0 - rho
                         : 1.0 - 2.0 * rho * std::cos(r * o.arg) + rho * rho;
      double term = o.period * std::exp(-s * r * o.log_mag) / denom;
      double g = r * o.aux;  // d/dh of the weight exponent
      tr[static_cast<std::size_t>(m)] += term;
      tr1[static_cast<std::size_t>(m)] += g * term;
      tr2[static_cast<std::size_t>(m)] += g * g * term;
    }
  }
  std::vector<double> a(static_cast<std::size_t>(N) + 1, 0.0);
  std::vector<double> a1(static_cast<std::size_t>(N) + 1, 0.0);
  std::vector<double> a2(static_cast<std::size_t>(N) + 1, 0.0);
  a[0] = 1.0;
  for (int k = 1; k <= N; ++k) {
    double acc = 0.0, acc1 = 0.0, acc2 = 0.0;
    for (int j = 1; j <= k; ++j) {
      std::size_t sj = static_cast<std::size_t>(j), sk = static_cast<std::size_t>(k - j);
      acc += tr[sj] * a[sk];
      acc1 += tr1[sj] * a[sk] + tr[sj] * a1[sk];
      acc2 += tr2[sj] * a[sk] + 2.0 * tr1[sj] * a1[sk] + tr[sj] * a2[sk];
    }
    a[static_cast<std::size_t>(k)] = -acc / k;
    a1[static_cast<std::size_t>(k)] = -acc1 / k;
    a2[static_cast<std::size_t>(k)] = -acc2 / k;
  }
  cplx u = det_root(a);
  double r_abs = std::abs(u);
  cplx d_u, d_uu;
  det_eval_c2(a, u, &d_u, &d_uu);
  double scale = 0.0, pw = 1.0;
  for (double ak : a) {
    scale += std::abs(ak) * pw;
    pw *= r_abs;
  }
  require(std::abs(d_u) * r_abs > 1e-9 * scale, ErrorKind::convergence,
          "det_curvature: determinant zero too close to a pair collision");
  cplx d_uh;
  cplx d_h = det_eval_c(a1, u, &d_uh);
  cplx d_hh = det_eval_c(a2, u);
  cplx up = -d_h / d_u;
  cplx upp = -(d_hh + 2.0 * d_uh * up + d_uu * up * up) / d_u;
  CurvatureEval out;
  out.pressure = -std::log(r_abs);
  cplx lp = up / u;
  out.slope = -std::real(lp);
  out.curvature = -std::real(upp / u - lp * lp);
  return out;
}

inline std::vector<Cycle> base_cycle_inventory(const QBPoint& pt, int max_period, int workers) {
  if (exact_blaschke_entrywise(pt)) return circle_cycles_upto(circle_lift_qb(pt), max_period, workers);
  CycleInventory inv = continued_cycles(qb_from_symmetrization(pt), max_period, 1.0, workers);
  require(inv.failed == 0, ErrorKind::tracking,
          "cycle inventory: transport from the circle-preserving symmetrization lost orbits");
  return inv.cycles;
}

}  // namespace detail

inline DimensionResult hausdorff_dimension(const QBPoint& pt, int max_period = 12,
                                           int workers = 1) {
  validate_qb_shape(pt);
  std::vector<Cycle> cycles = detail::base_cycle_inventory(pt, max_period, workers);
  DimensionResult res = bowen_dimension(multiplier_table(cycles, max_period));
  if (pt.validated)
    require(res.delta >= 1.0 - 1e-9, ErrorKind::diagnostic,
            "hausdorff_dimension: dimension below 1 at a validated point (quasi-circle should "
            "force delta >= 1)");
  return res;
}

/// Dimension of the map at parameter t of a path that starts circle-preserving.
inline DimensionResult hausdorff_dimension(const MapPath& path, double t, int max_period = 12,
                                           int workers = 1) {
  CycleInventory inv = continued_cycles(path, max_period, t, workers);
  require(inv.failed == 0, ErrorKind::tracking, "hausdorff_dimension: cycle transport lost orbits");
  return bowen_dimension(multiplier_table(inv.cycles, max_period));
}

/// Dimension of a polynomial Julia set, seeded by continuation from z^d.
inline DimensionResult hausdorff_dimension(const Poly& coeffs, int max_period = 12,
                                           int workers = 1) {
  Poly trimmed = poly_trim(coeffs);
  int d = poly_degree(trimmed);
  require(d >= 2, ErrorKind::bad_input, "hausdorff_dimension: need degree >= 2");
  Poly from(trimmed.size(), 0.0);
  from.back() = trimmed.back();  // start from c z^d with the same leading coefficient
  require(std::abs(trimmed.back() - cplx(1.0)) < 1e-12, ErrorKind::bad_input,
          "hausdorff_dimension: polynomial continuation starts at z^d (leading coefficient 1)");
  return hausdorff_dimension(poly_segment(from, trimmed), 1.0, max_period, workers);
}

/// Repelling-cycle inventory of a QB map up to max_period: boundary-lift
/// cycles when the point is exactly Blaschke entrywise, transported from the
/// circle-preserving symmetrization otherwise.
inline std::vector<Cycle> qb_cycle_inventory(const QBPoint& pt, int max_period, int workers = 1) {
  validate_qb_shape(pt);
  return detail::base_cycle_inventory(pt, max_period, workers);
}

/// Repelling-cycle inventory of a monic polynomial, by continuation from z^d.
inline std::vector<Cycle> poly_cycle_inventory(const Poly& coeffs, int max_period,
                                               int workers = 1) {
  Poly trimmed = poly_trim(coeffs);
  int d = poly_degree(trimmed);
  require(d >= 2, ErrorKind::bad_input, "poly_cycle_inventory: need degree >= 2");
  require(std::abs(trimmed.back() - cplx(1.0)) < 1e-12, ErrorKind::bad_input,
          "poly_cycle_inventory: polynomial continuation starts at z^d (leading coefficient 1)");
  Poly from(trimmed.size(), 0.0);
  from.back() = trimmed.back();
  CycleInventory inv = continued_cycles(poly_segment(from, trimmed), max_period, 1.0, workers);
  require(inv.failed == 0, ErrorKind::tracking, "poly_cycle_inventory: cycle transport lost orbits");
  return inv.cycles;
}

// ---------------------------------------------------------------------------
// Level-n Gibbs functionals on a transported inventory.  For a pair (f, g)
// joined by a path, the base weights are the level-n Bowen-normalized Gibbs
// weights of f; the functional G_f(g) = delta_n(g) * Ly_n(nu_f, g) attains
// its minimum at g = f exactly (Gibbs inequality), so the minimum property
// is structural rather than tolerance-limited.

struct PairedOrbit {
  int period = 0;
  double l_base = 0.0;    // log|lambda_C(f)|
  double l_target = 0.0;  // log|lambda_C(g)|
};

/// Tracks the full inventory of exact periods <= N from the path start to t1
/// and returns the per-orbit multiplier logs at both ends, index-aligned.
inline std::vector<PairedOrbit> transport_pairs(const MapPath& path, int N, double t1 = 1.0,
                                                int workers = 1) {
  require(path.has_lift0, ErrorKind::bad_input,
          "transport_pairs: path must start at an exact circle-preserving map");
  std::vector<Cycle> seeds = circle_cycles_upto(path.lift0, N, workers);
  std::vector<PairedOrbit> out(seeds.size());
  int n_chunks = static_cast<int>(std::min<std::size_t>(seeds.size(), 256));
  run_chunks(n_chunks, workers, [&](int chunk) {
    std::size_t lo = seeds.size() * static_cast<std::size_t>(chunk) / static_cast<std::size_t>(n_chunks);
    std::size_t hi = seeds.size() * (static_cast<std::size_t>(chunk) + 1) / static_cast<std::size_t>(n_chunks);
    for (std::size_t i = lo; i < hi; ++i) {
      double l0 = std::log(std::abs(seeds[i].multiplier));
      if (t1 == 0.0) {
        out[i] = {seeds[i].period, l0, l0};
        continue;
      }
      TrackSamples s = track_to_targets(path, seeds[i].points, 0.0, {t1});
      out[i] = {seeds[i].period, l0, std::log(std::abs(s.multiplier[0]))};
    }
  });
  return out;
}

namespace detail {

/// Root of log sum_{p | n} p e^{-s (n/p) L} = 0 (the level-n Bowen root).
inline double level_bowen_root(const std::vector<PairedOrbit>& orbits, int n, bool target) {
  auto logz = [&](double s, double* slope = nullptr) {
    detail::LseAcc acc(0);
    // Two passes: LSE for the value, then the derivative with the max known.
    for (const PairedOrbit& o : orbits) {
      if (n % o.period != 0) continue;
      double L = target ? o.l_target : o.l_base;
      acc.add(-s * (static_cast<double>(n) / o.period) * L, nullptr,
              static_cast<double>(o.period));
    }
    require(acc.count > 0, ErrorKind::domain, "level Bowen root: no orbits divide the level");
    if (slope) {
      double zsum = 0.0, d_num = 0.0;
      for (const PairedOrbit& o : orbits) {
        if (n % o.period != 0) continue;
        double L = target ? o.l_target : o.l_base;
        double rate = static_cast<double>(n) / o.period * L;
        double w = o.period * std::exp(-s * rate - acc.m);
        zsum += w;
        d_num -= w * rate;
      }
      *slope = d_num / zsum;
    }
    return std::log(acc.z) + acc.m;
  };
  double lo = 0.0, hi = 2.0;
  require(logz(lo) > 0.0, ErrorKind::domain, "level Bowen root: empty level");
  int expand = 0;
  while (logz(hi) > 0.0) {
    hi *= 2.0;
    require(++expand < 16, ErrorKind::convergence,
            "level Bowen root: partition function does not decay (non-expanding data?)");
  }
  double s = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double slope;
    double v = logz(s, &slope);
    if (std::abs(v) <= 1e-14) break;
    if (v > 0.0)
      lo = s;
    else
      hi = s;
    double newton = (slope < 0.0) ? s - v / slope : s;
    s = (newton > lo && newton < hi) ? newton : 0.5 * (lo + hi);
    if (hi - lo <= 1e-16) break;
  }
  return s;
}

}  // namespace detail

struct GFunctionalResult {
  double value = 0.0;        // delta_n(g) * Ly_n(nu_f, g)
  double delta_level = 0.0;  // level-n Bowen root of the target map
  double lyapunov = 0.0;     // Ly_n(nu_f, g)
};

/// Transported Lyapunov functional: the base map's level-n Gibbs weights
/// integrated against the target map's multiplier logs.
inline double lyapunov_transported(const std::vector<PairedOrbit>& orbits, int n) {
  double delta_f = detail::level_bowen_root(orbits, n, false);
  double m = -std::numeric_limits<double>::infinity();
  for (const PairedOrbit& o : orbits)
    if (n % o.period == 0)
      m = std::max(m, -delta_f * (static_cast<double>(n) / o.period) * o.l_base);
  double z = 0.0, num = 0.0;
  for (const PairedOrbit& o : orbits) {
    if (n % o.period != 0) continue;
    double reps = static_cast<double>(n) / o.period;
    double w = o.period * std::exp(-delta_f * reps * o.l_base - m);
    z += w;
    num += w * reps * o.l_target;
  }
  return num / (z * n);
}

inline GFunctionalResult g_functional(const std::vector<PairedOrbit>& orbits, int n) {
  GFunctionalResult out;
  out.lyapunov = lyapunov_transported(orbits, n);
  out.delta_level = detail::level_bowen_root(orbits, n, true);
  out.value = out.delta_level * out.lyapunov;
  return out;
}

/// G_f(f): the same functional with the target multipliers equal to the base.
inline GFunctionalResult g_functional_base(std::vector<PairedOrbit> orbits, int n) {
  for (PairedOrbit& o : orbits) o.l_target = o.l_base;
  return g_functional(orbits, n);
}

// ---------------------------------------------------------------------------
// Pressure semi-norm along a tangent direction at a QB point.

namespace detail {

/// Per-cycle transport along a tangent path to t = {+h/2, +h, -h/2, -h},
/// keeping multipliers and continuous log-multiplier branches.
struct TangentTransport {
  std::vector<Cycle> base;
  std::vector<std::array<cplx, 4>> multipliers;  // order: +h/2, +h, -h/2, -h
  std::vector<std::array<cplx, 4>> logs;
  std::vector<char> ok;
  int attempted = 0;
  int tracked = 0;
};

inline TangentTransport tangent_transport(const MapPath& path, std::vector<Cycle> base, double h,
                                          int workers, bool strict) {
  TangentTransport tt;
  tt.base = std::move(base);
  tt.attempted = static_cast<int>(tt.base.size());
  tt.multipliers.resize(tt.base.size());
  tt.logs.resize(tt.base.size());
  tt.ok.assign(tt.base.size(), 0);
  int n_chunks = static_cast<int>(std::min<std::size_t>(tt.base.size(), 256));
  run_chunks(n_chunks, workers, [&](int chunk) {
    std::size_t lo = tt.base.size() * static_cast<std::size_t>(chunk) / static_cast<std::size_t>(n_chunks);
    std::size_t hi = tt.base.size() * (static_cast<std::size_t>(chunk) + 1) / static_cast<std::size_t>(n_chunks);
    for (std::size_t i = lo; i < hi; ++i) {
      try {
        TrackSamples plus = track_to_targets(path, tt.base[i].points, 0.0, {0.5 * h, h}, 4);
        TrackSamples minus = track_to_targets(path, tt.base[i].points, 0.0, {-0.5 * h, -h}, 4);
        tt.multipliers[i] = {plus.multiplier[0], plus.multiplier[1], minus.multiplier[0],
                             minus.multiplier[1]};
        tt.logs[i] = {plus.log_multiplier[0], plus.log_multiplier[1], minus.log_multiplier[0],
                      minus.log_multiplier[1]};
        tt.ok[i] = 1;
      } catch (const Error&) {
        if (strict) throw;
        tt.ok[i] = 0;
      }
    }
  });
  for (char c : tt.ok) tt.tracked += c;
  return tt;
}

/// Dimension at one of the four tangent offsets, over the tracked subset.
inline double offset_dimension(const TangentTransport& tt, int slot, int max_period) {
  std::vector<Cycle> cycles;
  for (std::size_t i = 0; i < tt.base.size(); ++i) {
    if (!tt.ok[i]) continue;
    Cycle c = tt.base[i];
    c.multiplier = tt.multipliers[i][static_cast<std::size_t>(slot)];
    cycles.push_back(std::move(c));
  }
  return bowen_dimension(multiplier_table(cycles, max_period)).delta;
}

/// Richardson-refined d/dt of the dimension along the tangent path.  When
/// cycles were dropped (tolerant mode) the same subset is used at every
/// offset, so the subset bias cancels to first order in the difference.
inline double dimension_slope(const TangentTransport& tt, double h, int max_period) {
  double d_ph = offset_dimension(tt, 1, max_period);
  double d_mh = offset_dimension(tt, 3, max_period);
  double d_ph2 = offset_dimension(tt, 0, max_period);
  double d_mh2 = offset_dimension(tt, 2, max_period);
  double c_h = (d_ph - d_mh) / (2.0 * h);
  double c_h2 = (d_ph2 - d_mh2) / h;
  return (4.0 * c_h2 - c_h) / 3.0;
}

inline cplx dlog_from_transport(const TangentTransport& tt, std::size_t i, double h) {
  cplx c_h = (tt.logs[i][1] - tt.logs[i][3]) / (2.0 * h);
  cplx c_h2 = (tt.logs[i][0] - tt.logs[i][2]) / h;
  return (4.0 * c_h2 - c_h) / 3.0;
}

}  // namespace detail

struct CycleDerivative {
  int period = 0;
  cplx multiplier = 0.0;  // at the base point
  cplx dlog = 0.0;        // d/dt log lambda_C at t = 0
  double entry = 0.0;     // Re d/dt [delta(f_t) log|lambda_C(f_t)|]
  bool tracked = true;
};

struct SeminormResult {
  double value = 0.0;        // squared semi-norm
  double variance = 0.0;     // asymptotic variance of the path-derivative observable
  double denominator = 0.0;  // delta_0 * Lyapunov
  double lyapunov = 0.0;
  double delta0 = 0.0;
  double d_delta = 0.0;  // d(delta)/dt along the path at 0
  double cross_check = 0.0;  // finite-difference pressure estimate of `value`
  double h = 0.0;
  int level = 0;
  double level_gap = 0.0;  // |value - value one level down| stability report
  std::vector<CycleDerivative> table;
};

/// Squared pressure semi-norm of a tangent direction at a QB point: the
/// asymptotic variance of the observable with per-cycle Birkhoff sums
/// D_C = -d/dt[delta(f_t) log|lambda_C(f_t)|], divided by delta_0 times the
/// Lyapunov exponent, over the equilibrium state of -delta_0 log|f'|.  The
/// variance is the analytic second derivative of the determinant pressure in
/// the observable direction, cross-checked against a centered finite
/// difference of the same pressure; level-n orbit moments are reported as a
/// stability diagnostic only (their constant term converges slowly when the
/// spectral gap is weak).
inline SeminormResult pressure_seminorm(const QBPoint& pt, const TangentVector& dir,
                                        int level = 12, double h = 1e-4, int workers = 1,
                                        double rtol = 1e-2, double abs_floor = 1e-5) {
  validate_qb_shape(pt);
  require(level >= 4, ErrorKind::bad_input, "pressure_seminorm: level must be >= 4");
  require(h > 0.0, ErrorKind::bad_input, "pressure_seminorm: step must be positive");
  int N = level + 1;

  std::vector<Cycle> base = detail::base_cycle_inventory(pt, N, workers);
  MapPath path = qb_tangent(pt, dir, 2.0 * h);
  detail::TangentTransport tt =
      detail::tangent_transport(path, std::move(base), h, workers, /*strict=*/true);

  MultiplierTable base_tab = multiplier_table(tt.base, N);
  DimensionResult dim0 = bowen_dimension(base_tab);
  double delta0 = dim0.delta;
  double d_delta = detail::dimension_slope(tt, h, N);

  SeminormResult out;
  out.delta0 = delta0;
  out.d_delta = d_delta;
  out.h = h;
  out.level = level;

  std::vector<OrbitSample> orbits;
  orbits.reserve(tt.base.size());
  out.table.reserve(tt.base.size());
  for (std::size_t i = 0; i < tt.base.size(); ++i) {
    double L = std::log(std::abs(tt.base[i].multiplier));
    cplx dlog = detail::dlog_from_transport(tt, i, h);
    double d_c = -(d_delta * L + delta0 * dlog.real());
    CycleDerivative row;
    row.period = tt.base[i].period;
    row.multiplier = tt.base[i].multiplier;
    row.dlog = dlog;
    row.entry = -d_c;
    out.table.push_back(row);
    OrbitSample o;
    o.period = tt.base[i].period;
    o.s_phi = -delta0 * L;
    o.s_psi = {d_c};
    orbits.push_back(std::move(o));
  }

  double lyap = lyapunov_exponent(base_tab, delta0);
  double denominator = delta0 * lyap;
  require(denominator > 0.0, ErrorKind::domain,
          "pressure_seminorm: nonpositive denominator (Lyapunov exponent must be positive)");

  detail::LevelMoments top = detail::level_moments(orbits, 1, level);
  detail::LevelMoments mid = detail::level_moments(orbits, 1, level - 1);
  out.level_gap = std::abs(top.var[0] / level - mid.var[0] / (level - 1)) / denominator;

  std::vector<double> aux(orbits.size());
  for (std::size_t i = 0; i < orbits.size(); ++i)
    aux[i] = orbits[i].s_psi[0] - top.mean_rate[0] * orbits[i].period;
  out.variance = detail::det_curvature(base_tab, aux, delta0).curvature;
  double var_fd = detail::det_fd_variance(base_tab, aux, delta0);

  out.denominator = denominator;
  out.lyapunov = lyap;
  out.value = out.variance / denominator;
  out.cross_check = var_fd / denominator;
  detail::check_estimator_agreement(out.value, out.cross_check, rtol, abs_floor,
                                    "pressure seminorm");
  return out;
}

struct FormResult {
  double value = 0.0;
  double cross_check = 0.0;
  double denominator = 0.0;
  int level = 0;
};

/// Pressure form by polarization: the covariance of the two path-derivative
/// observables over the shared level-n Gibbs weights, normalized like the
/// semi-norm.  Consecutive-level differencing and a polarized determinant
/// finite-difference cross-check mirror pressure_seminorm.
inline FormResult pressure_form(const QBPoint& pt, const TangentVector& dir1,
                                const TangentVector& dir2, int level = 12, double h = 1e-4,
                                int workers = 1, double rtol = 1e-2, double abs_floor = 1e-5) {
  validate_qb_shape(pt);
  require(level >= 4, ErrorKind::bad_input, "pressure_form: level must be >= 4");
  int N = level + 1;
  std::vector<Cycle> base = detail::base_cycle_inventory(pt, N, workers);
  MapPath path1 = qb_tangent(pt, dir1, 2.0 * h);
  MapPath path2 = qb_tangent(pt, dir2, 2.0 * h);
  detail::TangentTransport t1 = detail::tangent_transport(path1, base, h, workers, true);
  detail::TangentTransport t2 = detail::tangent_transport(path2, std::move(base), h, workers, true);

  MultiplierTable base_tab = multiplier_table(t1.base, N);
  double delta0 = bowen_dimension(base_tab).delta;
  double dd1 = detail::dimension_slope(t1, h, N);
  double dd2 = detail::dimension_slope(t2, h, N);

  std::vector<OrbitSample> orbits;
  orbits.reserve(t1.base.size());
  for (std::size_t i = 0; i < t1.base.size(); ++i) {
    double L = std::log(std::abs(t1.base[i].multiplier));
    double d1 = -(dd1 * L + delta0 * detail::dlog_from_transport(t1, i, h).real());
    double d2 = -(dd2 * L + delta0 * detail::dlog_from_transport(t2, i, h).real());
    OrbitSample o;
    o.period = t1.base[i].period;
    o.s_phi = -delta0 * L;
    o.s_psi = {d1, d2};
    orbits.push_back(std::move(o));
  }

  double denominator = delta0 * lyapunov_exponent(base_tab, delta0);
  require(denominator > 0.0, ErrorKind::domain,
          "pressure_form: nonpositive denominator (Lyapunov exponent must be positive)");
  FormResult out;
  out.level = level;
  out.denominator = denominator;

  // Polarization: Var(x + y) - Var(x - y) = 4 Cov(x, y), with the analytic
  // determinant curvature as the value and its finite difference as check.
  detail::LevelMoments top = detail::level_moments(orbits, 2, level);
  std::vector<double> plus(orbits.size()), minus(orbits.size());
  for (std::size_t i = 0; i < orbits.size(); ++i) {
    const OrbitSample& o = orbits[i];
    double x = o.s_psi[0] - top.mean_rate[0] * o.period;
    double y = o.s_psi[1] - top.mean_rate[1] * o.period;
    plus[i] = x + y;
    minus[i] = x - y;
  }
  double an_plus = detail::det_curvature(base_tab, plus, delta0).curvature;
  double an_minus = detail::det_curvature(base_tab, minus, delta0).curvature;
  out.value = 0.25 * (an_plus - an_minus) / denominator;
  double fd_plus = detail::det_fd_variance(base_tab, plus, delta0);
  double fd_minus = detail::det_fd_variance(base_tab, minus, delta0);
  out.cross_check = 0.25 * (fd_plus - fd_minus) / denominator;
  detail::check_estimator_agreement(out.value, out.cross_check, rtol, abs_floor, "pressure form");
  return out;
}

// ---------------------------------------------------------------------------
// Degeneracy scan and the theorem harness.

enum class Verdict { degenerate, nondegenerate, inconclusive };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::degenerate: return "DEGENERATE";
    case Verdict::nondegenerate: return "NONDEGENERATE";
    default: return "INCONCLUSIVE";
  }
}

struct ScanResult {
  Verdict verdict = Verdict::inconclusive;
  double max_entry = 0.0;
  double tol = 0.0;
  int attempted = 0;
  int tracked = 0;
  double delta0 = 0.0;
  double d_delta = 0.0;
  std::vector<CycleDerivative> table;
};

/// Per-cycle derivative entries Re d/dt[delta log|lambda_C|] along a tangent
/// direction.  DEGENERATE when every tracked entry is below tol, NONDEGENERATE
/// when some entry clears the 10x hysteresis band, INCONCLUSIVE between.
/// Per-cycle tracking failures are tolerated up to 10% of the inventory.
inline ScanResult degeneracy_scan(const QBPoint& pt, const TangentVector& dir, int max_period = 8,
                                  double h = 1e-4, double tol_deg = 1e-4, int workers = 1) {
  validate_qb_shape(pt);
  require(tol_deg > 0.0, ErrorKind::bad_input, "degeneracy_scan: tolerance must be positive");
  std::vector<Cycle> base = detail::base_cycle_inventory(pt, max_period, workers);
  MapPath path = qb_tangent(pt, dir, 2.0 * h);
  detail::TangentTransport tt =
      detail::tangent_transport(path, std::move(base), h, workers, /*strict=*/false);
  require(tt.tracked * 10 >= tt.attempted * 9, ErrorKind::tracking,
          "degeneracy_scan: more than 10% of cycles failed to track");
  require(tt.tracked > 0, ErrorKind::tracking, "degeneracy_scan: no cycles tracked");

  ScanResult out;
  out.tol = tol_deg;
  out.attempted = tt.attempted;
  out.tracked = tt.tracked;
  {
    std::vector<Cycle> kept;
    for (std::size_t i = 0; i < tt.base.size(); ++i)
      if (tt.ok[i]) kept.push_back(tt.base[i]);
    out.delta0 = bowen_dimension(multiplier_table(kept, max_period)).delta;
  }
  out.d_delta = detail::dimension_slope(tt, h, max_period);

  for (std::size_t i = 0; i < tt.base.size(); ++i) {
    CycleDerivative row;
    row.period = tt.base[i].period;
    row.multiplier = tt.base[i].multiplier;
    row.tracked = tt.ok[i] != 0;
    if (row.tracked) {
      row.dlog = detail::dlog_from_transport(tt, i, h);
      double L = std::log(std::abs(tt.base[i].multiplier));
      row.entry = out.d_delta * L + out.delta0 * row.dlog.real();
      out.max_entry = std::max(out.max_entry, std::abs(row.entry));
    }
    out.table.push_back(row);
  }
  if (out.max_entry < tol_deg)
    out.verdict = Verdict::degenerate;
  else if (out.max_entry > 10.0 * tol_deg)
    out.verdict = Verdict::nondegenerate;
  else
    out.verdict = Verdict::inconclusive;
  return out;
}

struct DirectionReport {
  Verdict verdict = Verdict::inconclusive;
  double max_entry = 0.0;
  double seminorm_sq = 0.0;
  double tangential_norm = 0.0;  // size of the Blaschke-tangential component
  double normal_norm = 0.0;      // size of the complex-structure component
  double tb_seminorm_sq = -1.0;  // semi-norm of the T B component (-1: not computed)
  bool pure_j = false;
  bool zero = false;
};

struct LocusReport {
  bool blaschke = false;
  double delta = 0.0;
  bool has_nonreal_repelling = false;
  std::vector<DirectionReport> directions;
  std::vector<int> inconclusive;
  bool pass = false;
  std::string summary;
};

namespace detail {

inline double tangent_norm(const TangentVector& v) {
  double s = 0.0;
  for (cplx x : v.da) s += std::norm(x);
  for (cplx x : v.db) s += std::norm(x);
  return std::sqrt(s);
}

}  // namespace detail

/// Degeneracy-locus check at a validated point.  Off the Blaschke locus every
/// sampled nonzero direction must be non-degenerate and the dimension must
/// exceed 1; on the locus, pure complex-structure directions must be
/// degenerate, and if the semi-norm is bounded below on the sampled Blaschke
/// tangents, any degenerate direction must have negligible Blaschke
/// component.  Inconclusive scans are listed, never failed.
inline LocusReport check_degeneracy_locus(const QBPoint& pt, const std::vector<TangentVector>& dirs,
                                          int max_period = 8, int level = 10, double tol = 1e-4,
                                          int workers = 1) {
  validate_qb_shape(pt);
  require(pt.validated, ErrorKind::bad_input,
          "check_degeneracy_locus: point must be validated (run certify_component first)");
  LocusReport report;
  BlaschkePairing pairing = is_blaschke_point(pt);
  report.blaschke = pairing.is_blaschke;

  std::vector<Cycle> inventory = detail::base_cycle_inventory(pt, level + 1, workers);
  report.delta = bowen_dimension(multiplier_table(inventory, level + 1)).delta;
  for (const Cycle& c : inventory)
    if (std::abs(c.multiplier.imag()) > 1e-9 * std::abs(c.multiplier))
      report.has_nonreal_repelling = true;

  bool ok = true;
  double min_tb_norm_sq = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    DirectionReport dr;
    double size = detail::tangent_norm(dirs[i]);
    if (size < 1e-14) {
      dr.zero = true;
      report.directions.push_back(dr);
      continue;
    }
    ScanResult scan = degeneracy_scan(pt, dirs[i], max_period, 1e-4, tol, workers);
    dr.verdict = scan.verdict;
    dr.max_entry = scan.max_entry;
    dr.seminorm_sq = pressure_seminorm(pt, dirs[i], level, 1e-4, workers).value;
    if (report.blaschke) {
      TangentSplit split = tangent_decompose(align_blaschke(pt), dirs[i]);
      dr.tangential_norm = detail::tangent_norm(split.tangential);
      dr.normal_norm = detail::tangent_norm(split.normal);
      dr.pure_j = dr.tangential_norm < 1e-12 * size;
      if (dr.tangential_norm > 1e-9 * size) {
        dr.tb_seminorm_sq =
            pressure_seminorm(pt, split.tangential, level, 1e-4, workers).value;
        min_tb_norm_sq =
            std::min(min_tb_norm_sq, dr.tb_seminorm_sq / (dr.tangential_norm * dr.tangential_norm));
      } else {
        dr.tb_seminorm_sq = 0.0;
      }
    }
    if (dr.verdict == Verdict::inconclusive) report.inconclusive.push_back(static_cast<int>(i));
    report.directions.push_back(dr);
  }

  if (!report.blaschke) {
    if (report.delta <= 1.0 + 1e-5) ok = false;
    for (const DirectionReport& dr : report.directions)
      if (!dr.zero && dr.verdict == Verdict::degenerate) ok = false;
  } else {
    for (const DirectionReport& dr : report.directions)
      if (dr.pure_j && dr.verdict == Verdict::nondegenerate) ok = false;
    bool restricted_nondegenerate =
        std::isfinite(min_tb_norm_sq) && min_tb_norm_sq > tol;
    if (restricted_nondegenerate) {
      for (const DirectionReport& dr : report.directions)
        if (!dr.zero && dr.verdict == Verdict::degenerate && dr.tb_seminorm_sq > tol) ok = false;
    }
  }
  report.pass = ok;
  report.summary = std::string(report.blaschke ? "blaschke point" : "off-locus point") +
                   (report.pass ? ": checks passed" : ": checks FAILED") +
                   (report.inconclusive.empty() ? "" : " (with inconclusive directions)");
  return report;
}

/// Central-difference d(delta)/dt along a tangent direction (Richardson
/// refined), for locating dimension minima on parameter lines.
inline double dimension_derivative(const QBPoint& pt, const TangentVector& dir, double h = 1e-3,
                                   int max_period = 12, int workers = 1) {
  std::vector<Cycle> base = detail::base_cycle_inventory(pt, max_period, workers);
  MapPath path = qb_tangent(pt, dir, 2.0 * h);
  detail::TangentTransport tt =
      detail::tangent_transport(path, std::move(base), h, workers, /*strict=*/true);
  return detail::dimension_slope(tt, h, max_period);
}

}  // namespace pressurelab
