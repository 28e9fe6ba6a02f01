#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "pressurelab/common.hpp"
#include "pressurelab/parallel.hpp"
#include "pressurelab/poly.hpp"

namespace pressurelab {

/// f = p/q in coefficient form.  Degree is max(deg p, deg q) >= 2 and the
/// fraction must be reduced (no common roots).
struct RationalMap {
  Poly p;
  Poly q;
  int degree = 0;
};

inline RationalMap make_rational(Poly p, Poly q) {
  p = poly_trim(std::move(p));
  q = poly_trim(std::move(q));
  require(!(q.size() == 1 && q[0] == cplx(0.0)), ErrorKind::bad_input,
          "rational map: zero denominator");
  int dp = static_cast<int>(p.size()) - 1;
  int dq = static_cast<int>(q.size()) - 1;
  int d = std::max(dp, dq);
  require(d >= 2, ErrorKind::bad_input, "rational map: degree must be >= 2");
  if (dq >= 1) {
    double scale = 0.0;
    for (const cplx& c : p) scale = std::max(scale, std::abs(c));
    for (cplx r : poly_roots(q)) {
      double mag = std::max(1.0, std::pow(std::max(1.0, std::abs(r)), dp));
      require(std::abs(poly_eval(p, r)) > 1e-9 * scale * mag, ErrorKind::bad_input,
              "rational map: numerator and denominator share a root");
    }
  }
  return {std::move(p), std::move(q), d};
}

inline RationalMap poly_map(Poly coeffs) { return make_rational(std::move(coeffs), Poly{1.0}); }

inline cplx map_eval(const RationalMap& f, cplx z) { return poly_eval(f.p, z) / poly_eval(f.q, z); }

inline cplx map_deriv(const RationalMap& f, cplx z) {
  cplx dp, dq;
  cplx pv = poly_eval_deriv(f.p, z, dp);
  cplx qv = poly_eval_deriv(f.q, z, dq);
  return (dp * qv - pv * dq) / (qv * qv);
}

inline cplx map_eval_deriv(const RationalMap& f, cplx z, cplx& deriv) {
  cplx dp, dq;
  cplx pv = poly_eval_deriv(f.p, z, dp);
  cplx qv = poly_eval_deriv(f.q, z, dq);
  deriv = (dp * qv - pv * dq) / (qv * qv);
  return pv / qv;
}

struct FixedPoint {
  cplx z = 0.0;           // ignored when at_infinity
  cplx multiplier = 0.0;
  bool at_infinity = false;
};

struct FixedPointsResult {
  std::vector<FixedPoint> points;
  bool multiplicity_warning = false;  // two fixed points closer than 1e-8
};

/// All fixed points on the sphere.  Finite ones are the roots of
/// p(z) - z q(z), found simultaneously and polished by Newton; infinity is
/// handled in the w = 1/z chart, where the multiplier is q[d-1]/p[d] when
/// deg p = deg q + 1 and 0 when the degree gap is larger.
inline FixedPointsResult fixed_points(const RationalMap& f, std::uint64_t seed = 0x70726c6162u) {
  Poly r = poly_add(f.p, poly_scale(poly_mul(Poly{0.0, 1.0}, f.q), -1.0));
  r = poly_trim(r);
  FixedPointsResult out;
  int dp = static_cast<int>(f.p.size()) - 1;
  int dq = static_cast<int>(f.q.size()) - 1;
  if (dp > dq) {
    FixedPoint inf;
    inf.at_infinity = true;
    inf.multiplier = (dp == dq + 1) ? f.q.back() / f.p.back() : cplx(0.0);
    out.points.push_back(inf);
  }
  if (!(r.size() == 1 && r[0] == cplx(0.0))) {
    for (cplx z : poly_roots(r, seed)) {
      // Newton polish on the fixed-point equation of the map itself.
      for (int it = 0; it < 6; ++it) {
        cplx deriv;
        cplx val = map_eval_deriv(f, z, deriv) - z;
        cplx slope = deriv - 1.0;
        if (!(std::abs(slope) > 1e-14)) break;
        cplx delta = val / slope;
        z -= delta;
        if (std::abs(delta) < 1e-15 * std::max(1.0, std::abs(z))) break;
      }
      out.points.push_back({z, map_deriv(f, z), false});
    }
  }
  for (std::size_t i = 0; i < out.points.size(); ++i)
    for (std::size_t j = i + 1; j < out.points.size(); ++j) {
      if (out.points[i].at_infinity || out.points[j].at_infinity) continue;
      if (std::abs(out.points[i].z - out.points[j].z) < 1e-8) out.multiplicity_warning = true;
    }
  std::sort(out.points.begin(), out.points.end(), [](const FixedPoint& a, const FixedPoint& b) {
    if (a.at_infinity != b.at_infinity) return b.at_infinity;
    if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
    return a.z.imag() < b.z.imag();
  });
  return out;
}

/// Blaschke product z * prod (z - a_i)/(1 - conj(a_i) z), degree 1 + #a.
inline RationalMap blaschke(const std::vector<cplx>& a) {
  require(!a.empty(), ErrorKind::bad_input, "blaschke: need at least one zero (degree >= 2)");
  Poly num{0.0, 1.0};
  Poly den{1.0};
  for (cplx ai : a) {
    require(std::abs(ai) < 1.0, ErrorKind::bad_input, "blaschke: zeros must lie in the open disk");
    num = poly_mul(num, Poly{-ai, 1.0});
    den = poly_mul(den, Poly{1.0, -std::conj(ai)});
  }
  return make_rational(std::move(num), std::move(den));
}

/// Marked normal form on the space of degree-d maps fixing 0, infinity, and 1:
///   Q_{a,b}(z) = (prod (1-b_j)/(1-a_j)) * z * prod (z-a_j)/(1-b_j z).
/// The Blaschke locus is b = conj(a) up to permutation.
struct QBPoint {
  std::vector<cplx> a;
  std::vector<cplx> b;
  bool validated = false;
};

inline int qb_degree(const QBPoint& pt) { return static_cast<int>(pt.a.size()) + 1; }

inline void validate_qb_shape(const QBPoint& pt) {
  require(!pt.a.empty() && pt.a.size() == pt.b.size(), ErrorKind::bad_input,
          "qb point: a and b must both have length degree-1 >= 1");
  for (cplx v : pt.a)
    require(std::abs(v - cplx(1.0)) > 1e-12, ErrorKind::bad_input, "qb point: a_j = 1 breaks the normal form");
  for (cplx v : pt.b)
    require(std::abs(v - cplx(1.0)) > 1e-12, ErrorKind::bad_input, "qb point: b_j = 1 breaks the normal form");
}

inline RationalMap qb(const QBPoint& pt) {
  validate_qb_shape(pt);
  cplx pref = 1.0;
  for (std::size_t j = 0; j < pt.a.size(); ++j) pref *= (1.0 - pt.b[j]) / (1.0 - pt.a[j]);
  Poly num{0.0, pref};
  Poly den{1.0};
  for (cplx aj : pt.a) num = poly_mul(num, Poly{-aj, 1.0});
  for (cplx bj : pt.b) den = poly_mul(den, Poly{1.0, -bj});
  return make_rational(std::move(num), std::move(den));
}

inline QBPoint involution(const QBPoint& pt) {
  QBPoint out;
  out.a.reserve(pt.b.size());
  out.b.reserve(pt.a.size());
  for (cplx v : pt.b) out.a.push_back(std::conj(v));
  for (cplx v : pt.a) out.b.push_back(std::conj(v));
  out.validated = pt.validated;
  return out;
}

struct BlaschkePairing {
  bool is_blaschke = false;
  std::vector<int> pairing;  // b_j pairs with conj(a[pairing[j]])
};

/// Tests b = conj(a) up to permutation by exhausting assignments (degree <= 9).
/// Two distinct full matchings within tol make the pairing ambiguous.
inline BlaschkePairing is_blaschke_point(const QBPoint& pt, double tol = 1e-9) {
  validate_qb_shape(pt);
  int m = static_cast<int>(pt.a.size());
  require(m <= 9, ErrorKind::resource, "is_blaschke_point: assignment search capped at degree 10");
  std::vector<int> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best;
  int feasible = 0;
  do {
    bool ok = true;
    for (int j = 0; j < m && ok; ++j)
      ok = std::abs(pt.b[static_cast<std::size_t>(j)] -
                    std::conj(pt.a[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])])) < tol;
    if (ok) {
      ++feasible;
      if (best.empty()) best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  require(feasible <= 1, ErrorKind::diagnostic,
          "is_blaschke_point: pairing ambiguous (repeated parameters within tol)");
  BlaschkePairing out;
  out.is_blaschke = feasible == 1;
  if (out.is_blaschke) out.pairing = best;
  return out;
}

/// Reorders b so that b_j pairs with conj(a_j) entrywise.  The map itself is
/// unchanged (the denominator factors commute).
inline QBPoint align_blaschke(const QBPoint& pt, double tol = 1e-9) {
  BlaschkePairing pairing = is_blaschke_point(pt, tol);
  require(pairing.is_blaschke, ErrorKind::domain, "align_blaschke: point is not on the Blaschke locus");
  QBPoint out = pt;
  std::vector<cplx> b(pt.b.size());
  for (std::size_t j = 0; j < pt.b.size(); ++j)
    b[static_cast<std::size_t>(pairing.pairing[j])] = pt.b[j];
  out.b = std::move(b);
  return out;
}

struct TangentVector {
  std::vector<cplx> da;
  std::vector<cplx> db;
};

inline TangentVector tangent_scale(TangentVector v, cplx c) {
  for (cplx& x : v.da) x *= c;
  for (cplx& x : v.db) x *= c;
  return v;
}

inline TangentVector tangent_add(const TangentVector& u, const TangentVector& v) {
  TangentVector out = u;
  for (std::size_t j = 0; j < v.da.size(); ++j) out.da[j] += v.da[j];
  for (std::size_t j = 0; j < v.db.size(); ++j) out.db[j] += v.db[j];
  return out;
}

struct TangentSplit {
  TangentVector tangential;  // in T(Blaschke locus): db = conj(da)
  TangentVector normal;      // v = tangential + i * normal, normal also in T(Blaschke locus)
};

/// Splits a tangent vector at an (entrywise aligned) Blaschke point into its
/// Blaschke-tangential part and the part along the complex structure.  Exact
/// in floating point: only additions, conjugations, halving.
inline TangentSplit tangent_decompose(const QBPoint& pt, const TangentVector& v, double tol = 1e-9) {
  validate_qb_shape(pt);
  require(v.da.size() == pt.a.size() && v.db.size() == pt.b.size(), ErrorKind::bad_input,
          "tangent_decompose: vector length mismatch");
  for (std::size_t j = 0; j < pt.a.size(); ++j)
    require(std::abs(pt.b[j] - std::conj(pt.a[j])) < tol, ErrorKind::domain,
            "tangent_decompose: point is not entrywise on the Blaschke locus");
  TangentSplit out;
  std::size_t m = v.da.size();
  out.tangential.da.resize(m);
  out.tangential.db.resize(m);
  out.normal.da.resize(m);
  out.normal.db.resize(m);
  const cplx mi(0.0, -1.0);
  for (std::size_t j = 0; j < m; ++j) {
    cplx w1a = 0.5 * (v.da[j] + std::conj(v.db[j]));
    cplx w1b = 0.5 * (v.db[j] + std::conj(v.da[j]));
    out.tangential.da[j] = w1a;
    out.tangential.db[j] = w1b;
    out.normal.da[j] = mi * (v.da[j] - w1a);
    out.normal.db[j] = mi * (v.db[j] - w1b);
  }
  return out;
}

/// Degree-d circle map in lifted coordinates:
///   F(theta) = rot + d*theta - 2 sum_j arg(1 - conj(a_j) e^{i theta}).
/// Each arg argument has real part >= 1 - |a_j| > 0, so the principal branch
/// is smooth in theta and F is a genuine lift: F(theta + 2pi) = F(theta) + 2pi d,
/// with F' = d + 2 sum Re(conj(a_j) e^{i theta} / u_j) > 1.
struct CircleLift {
  std::vector<cplx> a;
  double rot = 0.0;
  int d = 2;
};

inline CircleLift circle_lift(const std::vector<cplx>& a, cplx prefactor = 1.0) {
  for (cplx ai : a)
    require(std::abs(ai) < 1.0, ErrorKind::bad_input, "circle lift: zeros must lie in the open disk");
  require(std::abs(std::abs(prefactor) - 1.0) < 1e-12, ErrorKind::bad_input,
          "circle lift: prefactor must be unimodular");
  return {a, std::arg(prefactor), static_cast<int>(a.size()) + 1};
}

/// Lift of the normal form at an exact Blaschke point (b must equal conj(a)
/// entrywise, bit for bit, so the map genuinely preserves the circle).
inline CircleLift circle_lift_qb(const QBPoint& pt) {
  validate_qb_shape(pt);
  for (std::size_t j = 0; j < pt.a.size(); ++j)
    require(pt.b[j] == std::conj(pt.a[j]), ErrorKind::domain,
            "circle lift: qb point must satisfy b = conj(a) exactly (align first)");
  cplx pref = 1.0;
  for (std::size_t j = 0; j < pt.a.size(); ++j) pref *= (1.0 - pt.b[j]) / (1.0 - pt.a[j]);
  return circle_lift(pt.a, pref / std::abs(pref));
}

inline double lift_eval(const CircleLift& lift, double theta) {
  double out = lift.rot + lift.d * theta;
  cplx e = std::polar(1.0, theta);
  for (cplx aj : lift.a) out -= 2.0 * std::arg(1.0 - std::conj(aj) * e);
  return out;
}

inline double lift_deriv(const CircleLift& lift, double theta) {
  double out = static_cast<double>(lift.d);
  cplx e = std::polar(1.0, theta);
  for (cplx aj : lift.a) {
    cplx w = std::conj(aj) * e;
    out += 2.0 * (w / (1.0 - w)).real();
  }
  return out;
}

inline double lift_iterate(const CircleLift& lift, double theta, int n, double* deriv = nullptr) {
  double d = 1.0;
  for (int i = 0; i < n; ++i) {
    if (deriv) d *= lift_deriv(lift, theta);
    theta = lift_eval(lift, theta);
  }
  if (deriv) *deriv = d;
  return theta;
}

/// Periodic cycle of a rational map: points in orbit order, starting from the
/// lexicographically least point; multiplier is the derivative product.
struct Cycle {
  std::vector<cplx> points;
  int period = 0;
  cplx multiplier = 0.0;
  bool repelling = false;
};

namespace detail {

inline std::size_t lex_least_index(const std::vector<cplx>& pts) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    cplx p = pts[i], q = pts[best];
    if (p.real() < q.real() || (p.real() == q.real() && p.imag() < q.imag())) best = i;
  }
  return best;
}

inline std::vector<cplx> canonical_rotation(const std::vector<cplx>& pts) {
  std::size_t k = lex_least_index(pts);
  std::vector<cplx> out;
  out.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) out.push_back(pts[(k + i) % pts.size()]);
  return out;
}

}  // namespace detail

/// All cycles of period dividing n on the unit circle, via the monotone lift.
/// F^n(theta) = theta + 2pi k has exactly one solution per k because
/// (F^n)' > 1; the solution set is indexed by k mod (d^n - 1) and the map acts
/// on indices as k -> d k, so orbit grouping is exact integer arithmetic.
/// Completeness (count d^n - 1) is structural, not heuristic.
inline std::vector<Cycle> circle_cycles(const CircleLift& lift, int n, int workers = 1,
                                        std::uint64_t cap = 10000000) {
  require(n >= 1, ErrorKind::bad_input, "circle_cycles: period must be >= 1");
  double dn = std::pow(static_cast<double>(lift.d), n);
  require(dn - 1.0 <= static_cast<double>(cap), ErrorKind::resource,
          "circle_cycles: d^n - 1 exceeds the point cap");
  std::int64_t m = static_cast<std::int64_t>(llround(dn)) - 1;

  // Solutions theta_k in [0, 2pi): G(theta) = F^n(theta) - theta takes each
  // value 2 pi k exactly once for k0 <= k < k0 + m.
  double g0 = lift_iterate(lift, 0.0, n);
  std::int64_t k0 = static_cast<std::int64_t>(std::ceil(g0 / kTwoPi - 1e-12));
  std::vector<double> theta(static_cast<std::size_t>(m));
  std::vector<double> fprime(static_cast<std::size_t>(m));

  int n_chunks = static_cast<int>(std::min<std::int64_t>(m, 256));
  run_chunks(n_chunks, workers, [&](int chunk) {
    std::int64_t lo = m * chunk / n_chunks, hi = m * (chunk + 1) / n_chunks;
    for (std::int64_t idx = lo; idx < hi; ++idx) {
      double target = kTwoPi * static_cast<double>(k0 + idx);
      double a = 0.0, b = kTwoPi;
      // Bisection to a tight bracket, then safeguarded Newton; G is strictly
      // increasing, so the sign of G(x) - target places x relative to the root.
      double x = 0.5 * (a + b);
      for (int it = 0; it < 200; ++it) {
        double deriv;
        double gx = lift_iterate(lift, x, n, &deriv) - x - target;
        if (std::abs(gx) < 1e-13) break;
        if (gx < 0)
          a = x;
        else
          b = x;
        double newton = x - gx / (deriv - 1.0);
        x = (newton > a && newton < b) ? newton : 0.5 * (a + b);
        if (b - a < 1e-15) break;
      }
      double deriv;
      lift_iterate(lift, x, n, &deriv);
      theta[static_cast<std::size_t>(idx)] = x;
      fprime[static_cast<std::size_t>(idx)] = deriv;
    }
  });

  // Group indices under k -> d k (mod m).
  std::vector<char> used(static_cast<std::size_t>(m), 0);
  std::vector<Cycle> out;
  for (std::int64_t k = 0; k < m; ++k) {
    if (used[static_cast<std::size_t>(k)]) continue;
    std::vector<std::int64_t> orbit;
    std::int64_t j = k;
    do {
      used[static_cast<std::size_t>(j)] = 1;
      orbit.push_back(j);
      j = (j * lift.d) % m;
    } while (j != k);
    Cycle c;
    c.period = static_cast<int>(orbit.size());
    double lambda = 1.0;
    for (std::int64_t idx : orbit) {
      c.points.push_back(std::polar(1.0, theta[static_cast<std::size_t>(idx)]));
      lambda *= lift_deriv(lift, theta[static_cast<std::size_t>(idx)]);
    }
    c.points = detail::canonical_rotation(c.points);
    c.multiplier = lambda;
    c.repelling = lambda > 1.0;
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const Cycle& x, const Cycle& y) {
    if (x.period != y.period) return x.period < y.period;
    cplx a = x.points[0], b = y.points[0];
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  std::int64_t covered = 0;
  for (const Cycle& c : out) covered += c.period;
  require(covered == m, ErrorKind::diagnostic, "circle_cycles: orbit grouping lost points");
  return out;
}

/// Orbits of every exact period 1..n: level m of circle_cycles holds the
/// periods dividing m, so the union keeps exactly the period-m orbits from
/// each level.
inline std::vector<Cycle> circle_cycles_upto(const CircleLift& lift, int n, int workers = 1,
                                             std::uint64_t cap = 10000000) {
  std::vector<Cycle> out;
  for (int m = 1; m <= n; ++m)
    for (Cycle& c : circle_cycles(lift, m, workers, cap))
      if (c.period == m) out.push_back(std::move(c));
  return out;
}

/// Critical points of f, as roots of p' q - p q'.
inline std::vector<cplx> critical_points(const RationalMap& f, std::uint64_t seed = 0x70726c6162u) {
  Poly num = poly_add(poly_mul(poly_derivative(f.p), f.q),
                      poly_scale(poly_mul(f.p, poly_derivative(f.q)), -1.0));
  num = poly_trim(num);
  if (num.size() == 1 && num[0] == cplx(0.0)) return {};
  return poly_roots(num, seed);
}

enum class CertifyStatus { certified, refuted, inconclusive };

struct ComponentCertificate {
  CertifyStatus status = CertifyStatus::inconclusive;
  double r0 = 0.0;       // |z| < r0 is certified inside the basin of 0
  double r_inf = 0.0;    // |z| > 1/r_inf is certified inside the basin of infinity
  int max_iterations = 0;
};

namespace detail {

/// Largest r in (0, 1/max|b|) with |Q(z)| <= 0.9 |z| guaranteed on |z| <= r,
/// from the coefficient bound |Q(z)|/|z| <= |pref| prod (r+|a_j|)/(1-|b_j| r).
inline double contraction_radius(const std::vector<cplx>& a, const std::vector<cplx>& b, double pref_abs) {
  auto factor = [&](double r) {
    double c = pref_abs;
    for (std::size_t j = 0; j < a.size(); ++j) {
      double den = 1.0 - std::abs(b[j]) * r;
      if (den <= 0.0) return 1e300;
      c *= (r + std::abs(a[j])) / den;
    }
    return c;
  };
  double lo = 0.0, hi = 1.0;
  if (factor(1e-9) > 0.9) return 0.0;
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    if (factor(mid) <= 0.9)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace detail

/// Certifies that every critical orbit falls into the basin of 0 or infinity,
/// which places the point in the hyperbolic component of z^d.  Sound but
/// incomplete: a slow orbit exhausts the budget and returns inconclusive;
/// convergence to some other attractor refutes membership.
inline ComponentCertificate certify_component(const QBPoint& pt, int budget = 20000) {
  validate_qb_shape(pt);
  RationalMap Q = qb(pt);
  ComponentCertificate cert;
  cert.max_iterations = budget;

  // 0 and infinity must be attracting to begin with.
  cplx l0 = map_deriv(Q, 0.0);
  cplx linf = (Q.p.size() == Q.q.size() + 1) ? Q.q.back() / Q.p.back() : cplx(0.0);
  if (!(std::abs(l0) < 1.0) || !(std::abs(linf) < 1.0)) {
    cert.status = CertifyStatus::refuted;
    return cert;
  }

  cplx pref = 1.0;
  for (std::size_t j = 0; j < pt.a.size(); ++j) pref *= (1.0 - pt.b[j]) / (1.0 - pt.a[j]);
  cert.r0 = detail::contraction_radius(pt.a, pt.b, std::abs(pref));
  cert.r_inf = detail::contraction_radius(pt.b, pt.a, 1.0 / std::abs(pref));
  if (cert.r0 <= 0.0 || cert.r_inf <= 0.0) return cert;  // cannot certify the basins at all

  for (cplx c : critical_points(Q)) {
    cplx z = c;
    bool settled = false;
    cplx prev = z;
    int stall = 0;
    for (int it = 0; it < budget; ++it) {
      if (std::abs(z) < cert.r0 || std::abs(z) > 1.0 / cert.r_inf) {
        settled = true;
        break;
      }
      cplx next = map_eval(Q, z);
      if (!std::isfinite(next.real()) || !std::isfinite(next.imag())) {
        settled = true;  // went through a pole: lands at infinity's basin
        break;
      }
      // A critical orbit freezing outside both certified disks is converging
      // to some other attractor.
      if (std::abs(next - z) < 1e-13 * std::max(1.0, std::abs(z)))
        ++stall;
      else
        stall = 0;
      if (stall > 50) {
        cert.status = CertifyStatus::refuted;
        return cert;
      }
      prev = z;
      z = next;
    }
    (void)prev;
    if (!settled) {
      cert.status = CertifyStatus::inconclusive;
      return cert;
    }
  }
  cert.status = CertifyStatus::certified;
  return cert;
}

}  // namespace pressurelab
