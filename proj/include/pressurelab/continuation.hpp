#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "pressurelab/common.hpp"
#include "pressurelab/maps.hpp"
#include "pressurelab/parallel.hpp"

namespace pressurelab {

/// One-parameter family of maps.  When the family starts (t = 0) at an exact
/// circle-preserving map, lift0 carries the circle lift and cycle inventories
/// can be seeded there with certified completeness.
struct MapPath {
  std::function<RationalMap(double)> map_at;
  std::function<QBPoint(double)> qb_at;  // only meaningful when has_qb
  bool has_qb = false;
  bool has_lift0 = false;
  CircleLift lift0;
  double t_lo = 0.0;
  double t_hi = 1.0;
};

namespace detail {

inline bool exact_blaschke_entrywise(const QBPoint& pt) {
  for (std::size_t j = 0; j < pt.a.size(); ++j)
    if (pt.b[j] != std::conj(pt.a[j])) return false;
  return true;
}

}  // namespace detail

inline MapPath qb_segment(const QBPoint& from, const QBPoint& to) {
  validate_qb_shape(from);
  validate_qb_shape(to);
  require(from.a.size() == to.a.size(), ErrorKind::bad_input, "qb segment: endpoint degrees differ");
  MapPath path;
  path.has_qb = true;
  path.qb_at = [from, to](double t) {
    QBPoint pt;
    pt.a.resize(from.a.size());
    pt.b.resize(from.b.size());
    for (std::size_t j = 0; j < from.a.size(); ++j) {
      pt.a[j] = (1.0 - t) * from.a[j] + t * to.a[j];
      pt.b[j] = (1.0 - t) * from.b[j] + t * to.b[j];
    }
    return pt;
  };
  path.map_at = [qb_at = path.qb_at](double t) { return qb(qb_at(t)); };
  if (detail::exact_blaschke_entrywise(from)) {
    path.has_lift0 = true;
    path.lift0 = circle_lift_qb(from);
  }
  return path;
}

inline MapPath qb_tangent(const QBPoint& at, const TangentVector& dir, double t_max = 1.0) {
  validate_qb_shape(at);
  require(dir.da.size() == at.a.size() && dir.db.size() == at.b.size(), ErrorKind::bad_input,
          "qb tangent: direction length mismatch");
  MapPath path;
  path.has_qb = true;
  path.t_lo = -t_max;
  path.t_hi = t_max;
  path.qb_at = [at, dir](double t) {
    QBPoint pt;
    pt.a.resize(at.a.size());
    pt.b.resize(at.b.size());
    for (std::size_t j = 0; j < at.a.size(); ++j) {
      pt.a[j] = at.a[j] + t * dir.da[j];
      pt.b[j] = at.b[j] + t * dir.db[j];
    }
    return pt;
  };
  path.map_at = [qb_at = path.qb_at](double t) { return qb(qb_at(t)); };
  if (detail::exact_blaschke_entrywise(at)) {
    path.has_lift0 = true;
    path.lift0 = circle_lift_qb(at);
  }
  return path;
}

inline MapPath poly_segment(const Poly& from, const Poly& to) {
  require(from.size() == to.size(), ErrorKind::bad_input, "poly segment: coefficient counts differ");
  MapPath path;
  path.map_at = [from, to](double t) {
    Poly c(from.size());
    for (std::size_t k = 0; k < from.size(); ++k) c[k] = (1.0 - t) * from[k] + t * to[k];
    return poly_map(std::move(c));
  };
  int d = static_cast<int>(from.size()) - 1;
  bool is_zd = true;
  for (std::size_t k = 0; k + 1 < from.size(); ++k) is_zd = is_zd && from[k] == cplx(0.0);
  is_zd = is_zd && from.back() == cplx(1.0) && d >= 2;
  if (is_zd) {
    path.has_lift0 = true;
    path.lift0 = circle_lift(std::vector<cplx>(static_cast<std::size_t>(d) - 1, 0.0));
  }
  return path;
}

/// Straight segment from the Blaschke symmetrization of a point to the point
/// itself; t = 0 is exactly circle-preserving by construction.
inline MapPath qb_from_symmetrization(const QBPoint& pt) {
  validate_qb_shape(pt);
  QBPoint ref;
  ref.a.resize(pt.a.size());
  ref.b.resize(pt.b.size());
  for (std::size_t j = 0; j < pt.a.size(); ++j) {
    ref.a[j] = 0.5 * (pt.a[j] + std::conj(pt.b[j]));
    ref.b[j] = std::conj(ref.a[j]);
  }
  return qb_segment(ref, pt);
}

inline double cycle_residual(const RationalMap& f, const std::vector<cplx>& z) {
  double worst = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i)
    worst = std::max(worst, std::abs(map_eval(f, z[i]) - z[(i + 1) % z.size()]));
  return worst;
}

/// One Newton step for the cyclic system {f(z_i) = z_{i+1}}.  The Jacobian is
/// diag(f'(z_i)) minus a cyclic shift, so the correction is an O(p) sweep with
/// the closing equation (prod f'(z_i) - 1) dz_0 = -sum suffix-products * F_j.
/// Fails when the multiplier is too close to 1 (parabolic collision).
inline double newton_cycle_step(const RationalMap& f, std::vector<cplx>& z) {
  std::size_t p = z.size();
  std::vector<cplx> F(p), D(p);
  for (std::size_t i = 0; i < p; ++i) {
    cplx deriv;
    cplx val = map_eval_deriv(f, z[i], deriv);
    F[i] = val - z[(i + 1) % p];
    D[i] = deriv;
  }
  std::vector<cplx> suffix(p + 1);
  suffix[p] = 1.0;
  for (std::size_t i = p; i-- > 0;) suffix[i] = suffix[i + 1] * D[i];
  cplx lambda = suffix[0];
  require(std::abs(lambda - 1.0) > 1e-10, ErrorKind::tracking,
          "cycle correction: multiplier pinned at 1 (parabolic collision)");
  cplx B = 0.0;
  for (std::size_t j = 0; j < p; ++j) B += suffix[j + 1] * F[j];
  std::vector<cplx> dz(p);
  dz[0] = -B / (lambda - 1.0);
  for (std::size_t i = 0; i + 1 < p; ++i) dz[i + 1] = D[i] * dz[i] + F[i];
  double step = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    z[i] += dz[i];
    step = std::max(step, std::abs(dz[i]));
  }
  return step;
}

/// Newton-polishes a cycle in place; returns the final residual.
inline double polish_cycle(const RationalMap& f, std::vector<cplx>& z, double tol = 1e-13,
                           int max_iter = 30) {
  double res = cycle_residual(f, z);
  for (int it = 0; it < max_iter && res > tol; ++it) {
    newton_cycle_step(f, z);
    res = cycle_residual(f, z);
  }
  return res;
}

inline cplx cycle_multiplier(const RationalMap& f, const std::vector<cplx>& z) {
  cplx prod = 1.0;
  for (cplx zi : z) prod *= map_deriv(f, zi);
  return prod;
}

/// Smallest divisor of the orbit length under which the stored points are
/// shift-invariant (up to tol).
inline int exact_cycle_period(const RationalMap&, const std::vector<cplx>& z, double tol = 1e-8) {
  int n = static_cast<int>(z.size());
  for (int q = 1; q < n; ++q) {
    if (n % q != 0) continue;
    bool match = true;
    for (int i = 0; i < n && match; ++i)
      match = std::abs(z[static_cast<std::size_t>((i + q) % n)] - z[static_cast<std::size_t>(i)]) < tol;
    if (match) return q;
  }
  return n;
}

struct CycleTrack {
  std::vector<double> t;
  std::vector<std::vector<cplx>> points;
  std::vector<cplx> multiplier;
  std::vector<cplx> log_multiplier;  // continuous branch along the track
  std::vector<int> newton_iters;
};

namespace detail {

struct TrackGuards {
  double residual_tol = 1e-10;
  double repelling_margin = 1e-3;  // require |lambda| > 1 + margin
  double separation = 1e-8;        // pairwise distinctness of cycle points
  double arg_jump = 0.5;           // max |arg(lambda ratio)| between nodes
};

inline void check_node(const std::vector<cplx>& z, cplx lambda, double residual,
                       const TrackGuards& g) {
  require(residual < g.residual_tol, ErrorKind::tracking, "cycle track: residual too large");
  require(std::abs(lambda) > 1.0 + g.repelling_margin, ErrorKind::tracking,
          "cycle track: multiplier entered the margin around |lambda| = 1 (left the component?)");
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = i + 1; j < z.size(); ++j)
      require(std::abs(z[i] - z[j]) > g.separation, ErrorKind::tracking,
              "cycle track: cycle points collided");
}

}  // namespace detail

/// Tracks a cycle from t_start to t_end with a linear predictor and the cyclic
/// Newton corrector; the step halves whenever Newton works too hard (> 8
/// iterations), the residual misses, repulsion degenerates, or the multiplier
/// argument jumps.  Appends nodes to the track, which must already hold the
/// polished state at t_start (pass an empty track to initialize).
inline void track_cycle_segment(const MapPath& path, CycleTrack& track, double t_start, double t_end,
                                int initial_steps = 8) {
  detail::TrackGuards guards;
  require(!track.t.empty(), ErrorKind::bad_input, "track_cycle_segment: track must be seeded at t_start");
  std::vector<cplx> z = track.points.back();
  cplx lm = track.log_multiplier.back();
  cplx lambda_prev = track.multiplier.back();
  double t = track.t.back();
  require(t == t_start, ErrorKind::bad_input, "track_cycle_segment: track does not end at t_start");
  if (t_end == t_start) return;

  double span = t_end - t_start;
  double dt = span / initial_steps;
  double min_dt = std::abs(span) * 1e-9 + 1e-15;
  std::vector<cplx> prev_points = z;
  double prev_t = t;
  bool have_prev = false;

  while ((span > 0) ? t < t_end : t > t_end) {
    double step = dt;
    if ((span > 0) ? (t + step > t_end) : (t + step < t_end)) step = t_end - t;
    double t_next = t + step;
    std::vector<cplx> cand = z;
    if (have_prev && prev_t != t) {
      double ratio = step / (t - prev_t);
      for (std::size_t i = 0; i < cand.size(); ++i) cand[i] = z[i] + ratio * (z[i] - prev_points[i]);
    }
    RationalMap f = path.map_at(t_next);
    bool ok = true;
    int iters = 0;
    double res = cycle_residual(f, cand);
    try {
      while (res > 1e-13 && iters <= 10) {
        newton_cycle_step(f, cand);
        res = cycle_residual(f, cand);
        ++iters;
      }
    } catch (const Error&) {
      ok = false;
    }
    cplx lambda = ok ? cycle_multiplier(f, cand) : cplx(0.0);
    cplx ratio = ok ? lambda / lambda_prev : cplx(0.0);
    if (ok) {
      ok = res < guards.residual_tol && iters <= 8 && std::abs(std::arg(ratio)) <= guards.arg_jump;
      if (ok) {
        try {
          detail::check_node(cand, lambda, res, guards);
        } catch (const Error&) {
          ok = false;
        }
      }
    }
    if (!ok) {
      dt *= 0.5;
      require(std::abs(dt) >= min_dt, ErrorKind::tracking,
              "cycle track: step underflow at t = " + std::to_string(t));
      continue;
    }
    prev_points = z;
    prev_t = t;
    have_prev = true;
    z = cand;
    t = t_next;
    lm += std::log(ratio);  // |arg| <= 0.5, principal branch is the continuous one
    lambda_prev = lambda;
    track.t.push_back(t);
    track.points.push_back(z);
    track.multiplier.push_back(lambda);
    track.log_multiplier.push_back(lm);
    track.newton_iters.push_back(iters);
    if (iters <= 3) dt = std::min(std::abs(dt) * 1.5, std::abs(span) / initial_steps) * (span > 0 ? 1.0 : -1.0);
  }
}

/// Seeds a track at t_start from approximate cycle points.
inline CycleTrack start_track(const MapPath& path, const std::vector<cplx>& points, double t_start) {
  CycleTrack track;
  RationalMap f = path.map_at(t_start);
  std::vector<cplx> z = points;
  double res = polish_cycle(f, z);
  cplx lambda = cycle_multiplier(f, z);
  detail::TrackGuards guards;
  detail::check_node(z, lambda, res, guards);
  track.t.push_back(t_start);
  track.points.push_back(z);
  track.multiplier.push_back(lambda);
  track.log_multiplier.push_back(std::log(lambda));
  track.newton_iters.push_back(0);
  return track;
}

/// Tracks a cycle from t_start through each target in order (targets need not
/// be monotone; each leg restarts from the previous one's endpoint).  Entry i
/// of the result is the node at targets[i].
struct TrackSamples {
  std::vector<std::vector<cplx>> points;
  std::vector<cplx> multiplier;
  std::vector<cplx> log_multiplier;
};

inline TrackSamples track_to_targets(const MapPath& path, const std::vector<cplx>& start_points,
                                     double t_start, const std::vector<double>& targets,
                                     int initial_steps = 8) {
  TrackSamples out;
  CycleTrack track = start_track(path, start_points, t_start);
  for (double target : targets) {
    track_cycle_segment(path, track, track.t.back(), target, initial_steps);
    out.points.push_back(track.points.back());
    out.multiplier.push_back(track.multiplier.back());
    out.log_multiplier.push_back(track.log_multiplier.back());
  }
  return out;
}

struct DlogMultiplier {
  cplx value = 0.0;   // d/dt log lambda at t = 0 (Richardson refined)
  cplx coarse = 0.0;  // plain central difference at step h
  double h = 0.0;
};

/// d/dt log lambda_C at t = 0 by central differences at steps h and h/2 with
/// one Richardson extrapolation; the real part is d/dt log |lambda_C|.
inline DlogMultiplier dlog_multiplier(const MapPath& path, const std::vector<cplx>& cycle_points,
                                      double h = 1e-4) {
  require(h > 0, ErrorKind::bad_input, "dlog_multiplier: step must be positive");
  TrackSamples plus = track_to_targets(path, cycle_points, 0.0, {0.5 * h, h}, 4);
  TrackSamples minus = track_to_targets(path, cycle_points, 0.0, {-0.5 * h, -h}, 4);
  cplx c_h = (plus.log_multiplier[1] - minus.log_multiplier[1]) / (2.0 * h);
  cplx c_h2 = (plus.log_multiplier[0] - minus.log_multiplier[0]) / h;
  DlogMultiplier out;
  out.coarse = c_h;
  out.value = (4.0 * c_h2 - c_h) / 3.0;
  out.h = h;
  return out;
}

/// Cycle inventory of the map at path end (t = t1), seeded from the exact
/// circle enumeration at t = 0 and transported orbit by orbit.  Failures are
/// collected instead of thrown so callers can decide how much loss is
/// tolerable; cycles keep their exact period and canonical rotation.
struct CycleInventory {
  int max_period = 0;
  std::vector<Cycle> cycles;
  int attempted = 0;
  int failed = 0;
};

inline CycleInventory continued_cycles(const MapPath& path, int max_period, double t1 = 1.0,
                                       int workers = 1, std::uint64_t cap = 10000000) {
  require(path.has_lift0, ErrorKind::bad_input,
          "continued_cycles: path does not start at an exact circle-preserving map");
  require(max_period >= 1, ErrorKind::bad_input, "continued_cycles: period must be >= 1");
  std::vector<Cycle> seeds = circle_cycles_upto(path.lift0, max_period, workers, cap);
  CycleInventory inv;
  inv.max_period = max_period;
  inv.attempted = static_cast<int>(seeds.size());
  if (t1 == 0.0) {
    inv.cycles = std::move(seeds);
    return inv;
  }
  std::vector<Cycle> done(seeds.size());
  std::vector<char> ok(seeds.size(), 0);
  int n_chunks = static_cast<int>(std::min<std::size_t>(seeds.size(), 256));
  run_chunks(n_chunks, workers, [&](int chunk) {
    std::size_t lo = seeds.size() * static_cast<std::size_t>(chunk) / static_cast<std::size_t>(n_chunks);
    std::size_t hi = seeds.size() * (static_cast<std::size_t>(chunk) + 1) / static_cast<std::size_t>(n_chunks);
    for (std::size_t i = lo; i < hi; ++i) {
      try {
        TrackSamples s = track_to_targets(path, seeds[i].points, 0.0, {t1});
        Cycle c;
        c.period = seeds[i].period;
        c.points = detail::canonical_rotation(s.points[0]);
        c.multiplier = s.multiplier[0];
        c.repelling = std::abs(c.multiplier) > 1.0;
        done[i] = std::move(c);
        ok[i] = 1;
      } catch (const Error&) {
        ok[i] = 0;
      }
    }
  });
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (ok[i])
      inv.cycles.push_back(std::move(done[i]));
    else
      ++inv.failed;
  }
  return inv;
}

/// Plane-mode fallback: Newton from a deterministic seed grid on rings around
/// the unit circle.  Finds repelling cycles without any completeness
/// guarantee; prefer continued_cycles whenever a circle-preserving start is
/// available.
inline std::vector<Cycle> newton_grid_cycles(const RationalMap& f, int period, int workers = 1,
                                             std::uint64_t seed = 0x70726c6162u) {
  require(period >= 1, ErrorKind::bad_input, "newton_grid_cycles: period must be >= 1");
  std::vector<double> radii{0.7, 0.9, 1.0, 1.1, 1.4};
  int n_angles = 16 * period;
  std::vector<cplx> seeds_pts;
  SplitMix64 rng{seed};
  for (double r : radii)
    for (int k = 0; k < n_angles; ++k)
      seeds_pts.push_back(std::polar(r, kTwoPi * (k + 0.01 * rng.uniform()) / n_angles));

  std::vector<std::vector<Cycle>> found(seeds_pts.size());
  int n_chunks = static_cast<int>(std::min<std::size_t>(seeds_pts.size(), 256));
  run_chunks(n_chunks, workers, [&](int chunk) {
    std::size_t lo = seeds_pts.size() * static_cast<std::size_t>(chunk) / static_cast<std::size_t>(n_chunks);
    std::size_t hi = seeds_pts.size() * (static_cast<std::size_t>(chunk) + 1) / static_cast<std::size_t>(n_chunks);
    for (std::size_t s = lo; s < hi; ++s) {
      cplx z = seeds_pts[s];
      bool converged = false;
      for (int it = 0; it < 60; ++it) {
        // Newton on f^p(z) - z.
        cplx w = z, dw = 1.0;
        bool bad = false;
        for (int i = 0; i < period; ++i) {
          cplx deriv;
          w = map_eval_deriv(f, w, deriv);
          dw *= deriv;
          if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) {
            bad = true;
            break;
          }
        }
        if (bad) break;
        cplx g = w - z, dg = dw - 1.0;
        if (std::abs(dg) < 1e-14) break;
        cplx delta = g / dg;
        z -= delta;
        if (std::abs(delta) < 1e-14 * std::max(1.0, std::abs(z))) {
          converged = std::abs(g) < 1e-10;
          break;
        }
      }
      if (!converged) continue;
      std::vector<cplx> orbit{z};
      for (int i = 1; i < period; ++i) orbit.push_back(map_eval(f, orbit.back()));
      if (cycle_residual(f, orbit) > 1e-9) continue;
      int p = period;
      for (int div = 1; div < period; ++div) {
        if (period % div != 0) continue;
        if (std::abs(orbit[static_cast<std::size_t>(div)] - orbit[0]) < 1e-8) {
          p = div;
          break;
        }
      }
      orbit.resize(static_cast<std::size_t>(p));
      double res = polish_cycle(f, orbit);
      if (res > 1e-10) continue;
      Cycle c;
      c.period = p;
      c.points = detail::canonical_rotation(orbit);
      c.multiplier = cycle_multiplier(f, orbit);
      c.repelling = std::abs(c.multiplier) > 1.0;
      found[s].push_back(std::move(c));
    }
  });

  std::vector<Cycle> out;
  auto same_cycle = [](const Cycle& x, const Cycle& y) {
    if (x.period != y.period) return false;
    return std::abs(x.points[0] - y.points[0]) < 1e-7;
  };
  for (auto& bucket : found)
    for (auto& c : bucket) {
      bool dup = false;
      for (const auto& kept : out) dup = dup || same_cycle(kept, c);
      if (!dup) out.push_back(std::move(c));
    }
  std::sort(out.begin(), out.end(), [](const Cycle& x, const Cycle& y) {
    if (x.period != y.period) return x.period < y.period;
    cplx a = x.points[0], b = y.points[0];
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

/// Cyclic-order marking: tracks the d-1 free fixed points (all but 0 and
/// infinity) along a path to the circle-preserving symmetrization, reads the
/// counter-clockwise order of their images on the unit circle starting at the
/// marked fixed point 1, and transports that order back to the start map.
struct MarkingLabel {
  std::vector<cplx> fixed_points;   // at the start map, in transported cyclic order, fixed_points[0] ~ 1
  std::vector<double> circle_args;  // arguments of the partners on the circle, ascending from 0
};

inline MarkingLabel transport_marking(const QBPoint& pt, int grid = 16) {
  validate_qb_shape(pt);
  MapPath path = qb_from_symmetrization(pt);
  RationalMap Q = qb(pt);

  auto fps = fixed_points(Q);
  std::vector<cplx> free;
  for (const auto& fp : fps.points) {
    if (fp.at_infinity || std::abs(fp.z) < 1e-9) continue;
    free.push_back(fp.z);
  }
  require(static_cast<int>(free.size()) == qb_degree(pt) - 1, ErrorKind::domain,
          "transport_marking: expected d-1 free fixed points (map may be degenerate)");

  // Synchronized walk from the point (t = 1) to the Blaschke end (t = 0):
  // every fixed point advances over the same grid so collisions are caught.
  std::vector<std::vector<cplx>> walkers(free.size());
  for (std::size_t i = 0; i < free.size(); ++i) walkers[i] = {free[i]};
  std::vector<double> ts(static_cast<std::size_t>(grid) + 1);
  for (int k = 0; k <= grid; ++k) ts[static_cast<std::size_t>(k)] = 1.0 - static_cast<double>(k) / grid;
  for (std::size_t step = 1; step < ts.size(); ++step) {
    RationalMap f = path.map_at(ts[step]);
    for (std::size_t i = 0; i < free.size(); ++i) {
      std::vector<cplx> z{walkers[i].back()};
      double res = polish_cycle(f, z);
      require(res < 1e-10, ErrorKind::tracking, "transport_marking: fixed point lost along the path");
      walkers[i].push_back(z[0]);
    }
    for (std::size_t i = 0; i < free.size(); ++i)
      for (std::size_t j = i + 1; j < free.size(); ++j)
        require(std::abs(walkers[i].back() - walkers[j].back()) > 1e-6, ErrorKind::tracking,
                "transport_marking: fixed points collided (parabolic boundary)");
  }

  std::vector<std::size_t> order(free.size());
  std::vector<double> args(free.size());
  for (std::size_t i = 0; i < free.size(); ++i) {
    cplx end = walkers[i].back();
    require(std::abs(std::abs(end) - 1.0) < 1e-6, ErrorKind::diagnostic,
            "transport_marking: endpoint fixed point is not on the circle");
    args[i] = mod_two_pi(std::arg(end));
  }
  // The marked fixed point 1 stays at 1 along the whole family; snap its
  // argument so it sorts first.
  for (std::size_t i = 0; i < free.size(); ++i)
    if (std::abs(walkers[i].back() - 1.0) < 1e-9) args[i] = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return args[x] < args[y]; });

  MarkingLabel label;
  for (std::size_t idx : order) {
    label.fixed_points.push_back(free[idx]);
    label.circle_args.push_back(args[idx]);
  }
  return label;
}

/// Checks the conjugation symmetry of the parameter involution on cycles: for
/// every tracked cycle of Q_{a,b}, the reflected points 1/conj(z) form a cycle
/// of Q_{conj b, conj a} with conjugate multiplier.  Returns the worst
/// multiplier deviation.
struct InvolutionCheck {
  int cycles_checked = 0;
  double max_multiplier_deviation = 0.0;
  double max_residual = 0.0;
};

inline InvolutionCheck involution_check(const QBPoint& pt, int max_period, int workers = 1) {
  MapPath path = qb_from_symmetrization(pt);
  CycleInventory inv = continued_cycles(path, max_period, 1.0, workers);
  require(inv.failed == 0, ErrorKind::tracking, "involution_check: cycle transport failed");
  RationalMap Qi = qb(involution(pt));
  InvolutionCheck out;
  for (const Cycle& c : inv.cycles) {
    std::vector<cplx> mirror;
    mirror.reserve(c.points.size());
    for (cplx z : c.points) mirror.push_back(1.0 / std::conj(z));
    double res = polish_cycle(Qi, mirror);
    out.max_residual = std::max(out.max_residual, res);
    require(res < 1e-9, ErrorKind::diagnostic,
            "involution_check: reflected points do not close up under the partner map");
    cplx lam = cycle_multiplier(Qi, mirror);
    out.max_multiplier_deviation =
        std::max(out.max_multiplier_deviation, std::abs(lam - std::conj(c.multiplier)));
    ++out.cycles_checked;
  }
  return out;
}

}  // namespace pressurelab
