#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "pressurelab/common.hpp"
#include "pressurelab/maps.hpp"
#include "pressurelab/parallel.hpp"
#include "pressurelab/symbolic.hpp"

namespace pressurelab {

/// Potential on a subshift depending on the first `depth` symbols, stored as a
/// dense lookup over all n^depth windows (inadmissible windows hold NaN so an
/// out-of-language read poisons the result instead of passing silently).
struct SftPotential {
  SubshiftSpec spec;
  int depth = 1;
  std::vector<double> dense;
};

namespace detail {

inline bool same_subshift(const SubshiftSpec& x, const SubshiftSpec& y) {
  return x.n == y.n && x.A == y.A;
}

inline std::size_t dense_size(const SubshiftSpec& spec, int depth) {
  require(depth >= 1, ErrorKind::bad_input, "potential depth must be >= 1");
  double size = std::pow(static_cast<double>(spec.n), depth);
  require(size <= static_cast<double>(1 << 24), ErrorKind::resource,
          "potential table: n^depth exceeds the dense-table cap");
  return static_cast<std::size_t>(llround(size));
}

}  // namespace detail

/// Table of values per admissible depth-k cylinder, in the enumeration order
/// of enumerate_cylinders.
inline SftPotential make_cylinder_table(const SubshiftSpec& spec, int depth,
                                        const std::vector<double>& values) {
  validate_subshift(spec);
  std::size_t size = detail::dense_size(spec, depth);
  std::vector<std::vector<int>> cyls = enumerate_cylinders(spec, depth);
  require(values.size() == cyls.size(), ErrorKind::bad_input,
          "cylinder table: expected one value per admissible depth-" + std::to_string(depth) +
              " cylinder (" + std::to_string(cyls.size()) + "), got " +
              std::to_string(values.size()));
  SftPotential pot;
  pot.spec = spec;
  pot.depth = depth;
  pot.dense.assign(size, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < cyls.size(); ++i) {
    std::size_t code = 0;
    for (int s : cyls[i]) code = code * static_cast<std::size_t>(spec.n) + static_cast<std::size_t>(s);
    pot.dense[code] = values[i];
  }
  return pot;
}

inline SftPotential constant_potential(const SubshiftSpec& spec, double c) {
  validate_subshift(spec);
  SftPotential pot;
  pot.spec = spec;
  pot.depth = 1;
  pot.dense.assign(static_cast<std::size_t>(spec.n), c);
  return pot;
}

/// Values per admissible depth-k cylinder in enumeration order (the
/// serialization layout).
inline std::vector<double> cylinder_values(const SftPotential& pot) {
  std::vector<std::vector<int>> cyls = enumerate_cylinders(pot.spec, pot.depth);
  std::vector<double> out;
  out.reserve(cyls.size());
  for (const auto& w : cyls) {
    std::size_t code = 0;
    for (int s : w) code = code * static_cast<std::size_t>(pot.spec.n) + static_cast<std::size_t>(s);
    out.push_back(pot.dense[code]);
  }
  return out;
}

/// Linear combination, flattened to one dense table at the maximum depth.
/// A window's depth-k prefix code is the base-n high part of its code.
inline SftPotential linear_combine(const std::vector<std::pair<double, SftPotential>>& terms) {
  require(!terms.empty(), ErrorKind::bad_input, "linear_combine: no terms");
  const SubshiftSpec& spec = terms[0].second.spec;
  int depth = 1;
  for (const auto& [c, pot] : terms) {
    require(detail::same_subshift(spec, pot.spec), ErrorKind::bad_input,
            "linear_combine: potentials live on different subshifts");
    depth = std::max(depth, pot.depth);
  }
  SftPotential out;
  out.spec = spec;
  out.depth = depth;
  out.dense.assign(detail::dense_size(spec, depth), 0.0);
  for (const auto& [c, pot] : terms) {
    std::size_t shrink = 1;
    for (int t = 0; t < depth - pot.depth; ++t) shrink *= static_cast<std::size_t>(spec.n);
    for (std::size_t code = 0; code < out.dense.size(); ++code)
      out.dense[code] += c * pot.dense[code / shrink];
  }
  return out;
}

/// h after one shift minus h: a potential whose Birkhoff sums telescope to
/// zero on every periodic word.
inline SftPotential coboundary_potential(const SftPotential& h) {
  SftPotential out;
  out.spec = h.spec;
  out.depth = h.depth + 1;
  std::size_t size = detail::dense_size(h.spec, out.depth);
  std::size_t base = static_cast<std::size_t>(h.spec.n);
  std::size_t tail_mod = size / base;
  out.dense.resize(size);
  for (std::size_t code = 0; code < size; ++code)
    out.dense[code] = h.dense[code % tail_mod] - h.dense[code / base];
  return out;
}

/// Value of the potential at shift position i of the cyclic word w.
inline double potential_value(const SftPotential& pot, const std::vector<int>& w, int i) {
  int L = static_cast<int>(w.size());
  std::size_t code = 0;
  for (int t = 0; t < pot.depth; ++t)
    code = code * static_cast<std::size_t>(pot.spec.n) +
           static_cast<std::size_t>(w[static_cast<std::size_t>((i + t) % L)]);
  return pot.dense[code];
}

/// Birkhoff sum over one cyclic traversal of w (rolling window codes).
inline double birkhoff_sum(const SftPotential& pot, const std::vector<int>& w) {
  int L = static_cast<int>(w.size());
  std::size_t base = static_cast<std::size_t>(pot.spec.n);
  std::size_t mod = 1;
  for (int t = 0; t < pot.depth - 1; ++t) mod *= base;
  std::size_t code = 0;
  for (int t = 0; t < pot.depth; ++t)
    code = code * base + static_cast<std::size_t>(w[static_cast<std::size_t>(t % L)]);
  double sum = 0.0;
  for (int i = 0; i < L; ++i) {
    sum += pot.dense[code];
    code = (code % mod) * base + static_cast<std::size_t>(w[static_cast<std::size_t>((i + pot.depth) % L)]);
  }
  return sum;
}

/// Geometric potential -s log|f'| along Julia-set orbits; on a repelling
/// cycle one traversal sums to -s log|lambda_C|.
struct GeometricPotential {
  double s = 1.0;
};

inline double birkhoff_sum(const GeometricPotential& pot, const Cycle& c) {
  double mag = std::abs(c.multiplier);
  require(mag > 0.0, ErrorKind::domain,
          "geometric potential: cycle multiplier vanishes (critical point on the orbit)");
  return -pot.s * std::log(mag);
}

// ---------------------------------------------------------------------------
// Orbit sweeps.  All Gibbs expectations are weighted sums over period-n
// points with weights e^{S_n phi}, evaluated in log-sum-exp form.  Chunks
// accumulate sequentially in lexicographic order and fold in chunk order, so
// results are bitwise independent of the worker count.

struct SweepResult {
  std::uint64_t count = 0;                  // period-n points visited
  double log_z = 0.0;                       // log sum e^{S_n phi}
  double mean_phi = 0.0;                    // weighted mean of S_n phi
  std::vector<double> mean_psi;             // weighted means of S_n psi_j
  std::vector<std::vector<double>> second_psi;  // centered second moments of S_n psi
  std::vector<double> sup_psi_rate;         // max |S_n psi_j| / n over visited words
};

namespace detail {

struct LseAcc {
  double m = -std::numeric_limits<double>::infinity();
  double z = 0.0;
  double aphi = 0.0;
  std::vector<double> a;
  std::vector<double> sup;
  std::uint64_t count = 0;

  explicit LseAcc(std::size_t k = 0) : a(k, 0.0), sup(k, 0.0) {}

  void add(double s_phi, const double* s_psi, double mult) {
    if (s_phi > m) {
      double r = std::exp(m - s_phi);  // exp(-inf) = 0 seeds the first term
      z = z * r + mult;
      aphi = aphi * r + mult * s_phi;
      for (std::size_t j = 0; j < a.size(); ++j) a[j] = a[j] * r + mult * s_psi[j];
      m = s_phi;
    } else {
      double w = mult * std::exp(s_phi - m);
      z += w;
      aphi += w * s_phi;
      for (std::size_t j = 0; j < a.size(); ++j) a[j] += w * s_psi[j];
    }
    for (std::size_t j = 0; j < sup.size(); ++j) sup[j] = std::max(sup[j], std::abs(s_psi[j]));
    count += static_cast<std::uint64_t>(llround(mult));
  }

  void fold(const LseAcc& o) {
    if (o.count == 0) return;
    count += o.count;
    for (std::size_t j = 0; j < sup.size(); ++j) sup[j] = std::max(sup[j], o.sup[j]);
    if (o.m > m) {
      double r = std::exp(m - o.m);
      z = z * r + o.z;
      aphi = aphi * r + o.aphi;
      for (std::size_t j = 0; j < a.size(); ++j) a[j] = a[j] * r + o.a[j];
      m = o.m;
    } else {
      double r = std::exp(o.m - m);
      z += o.z * r;
      aphi += o.aphi * r;
      for (std::size_t j = 0; j < a.size(); ++j) a[j] += o.a[j] * r;
    }
  }
};

inline void check_estimator_agreement(double primary, double cross, double rtol, double abs_floor,
                                      const char* what) {
  double gap = std::abs(primary - cross);
  double allowed = std::max(abs_floor, rtol * std::max(std::abs(primary), std::abs(cross)));
  if (gap > allowed) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "%s: orbit estimator %.17g and finite-difference cross-check %.17g disagree "
                  "beyond %.3g",
                  what, primary, cross, allowed);
    fail(ErrorKind::diagnostic, buf);
  }
}

}  // namespace detail

/// Weighted moments of S_n psi_j under the Gibbs weights of phi at level n.
inline SweepResult sft_sweep(const SftPotential& phi, const std::vector<SftPotential>& psis, int n,
                             int workers = 1, std::uint64_t cap = kDefaultWordCap) {
  require(psis.size() <= 8, ErrorKind::bad_input, "orbit sweep: at most 8 observables per sweep");
  for (const auto& psi : psis)
    require(detail::same_subshift(phi.spec, psi.spec), ErrorKind::bad_input,
            "orbit sweep: potentials live on different subshifts");
  ScanPlan plan = plan_word_scan(phi.spec, n, true, cap);
  std::size_t k = psis.size();
  std::size_t n_chunks = plan.prefixes.size();

  std::vector<detail::LseAcc> acc(n_chunks, detail::LseAcc(k));
  scan_words(phi.spec, plan, workers, [&](int c, const std::vector<int>& w) {
    double s_phi = birkhoff_sum(phi, w);
    double s_psi[8];
    for (std::size_t j = 0; j < k; ++j) s_psi[j] = birkhoff_sum(psis[j], w);
    acc[static_cast<std::size_t>(c)].add(s_phi, s_psi, 1.0);
  });
  detail::LseAcc total(k);
  for (const auto& a : acc) total.fold(a);
  require(total.count == plan.total, ErrorKind::diagnostic,
          "orbit sweep: visited word count disagrees with trace(A^n)");
  require(total.count > 0, ErrorKind::domain, "orbit sweep: no periodic words at this level");

  SweepResult out;
  out.count = total.count;
  out.log_z = std::log(total.z) + total.m;
  out.mean_phi = total.aphi / total.z;
  out.mean_psi.resize(k);
  for (std::size_t j = 0; j < k; ++j) out.mean_psi[j] = total.a[j] / total.z;
  out.sup_psi_rate.resize(k);
  for (std::size_t j = 0; j < k; ++j) out.sup_psi_rate[j] = total.sup[j] / n;

  if (k > 0) {
    // Second pass: centered moments with the global max and means known.
    std::vector<std::vector<std::vector<double>>> c2(
        n_chunks, std::vector<std::vector<double>>(k, std::vector<double>(k, 0.0)));
    double M = total.m;
    scan_words(phi.spec, plan, workers, [&](int c, const std::vector<int>& w) {
      double wgt = std::exp(birkhoff_sum(phi, w) - M);
      double dev[8];
      for (std::size_t j = 0; j < k; ++j) dev[j] = birkhoff_sum(psis[j], w) - out.mean_psi[j];
      auto& local = c2[static_cast<std::size_t>(c)];
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j) local[i][j] += wgt * dev[i] * dev[j];
    });
    out.second_psi.assign(k, std::vector<double>(k, 0.0));
    for (const auto& local : c2)
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j) out.second_psi[i][j] += local[i][j];
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i; j < k; ++j) {
        out.second_psi[i][j] /= total.z;
        out.second_psi[j][i] = out.second_psi[i][j];
      }
  }
  return out;
}

struct EquilibriumStats {
  double pressure = 0.0;
  double mean_energy = 0.0;  // equilibrium average of phi (per symbol)
  double entropy = 0.0;
  int orbit_period_used = 0;
  std::string estimator;
  double convergence_gap = 0.0;  // |ratio at n - ratio at n-1|
  bool convergence_warning = false;
};

namespace detail {

inline EquilibriumStats ratio_stats(double log_z_nm1, double log_z_n, double log_z_np1,
                                    double mean_phi_n, int n, double warn_tol) {
  EquilibriumStats st;
  st.pressure = log_z_np1 - log_z_n;
  st.mean_energy = mean_phi_n / n;
  st.entropy = st.pressure - st.mean_energy;
  st.orbit_period_used = n;
  st.estimator = "orbit";
  st.convergence_gap = std::abs((log_z_np1 - log_z_n) - (log_z_n - log_z_nm1));
  st.convergence_warning = st.convergence_gap > warn_tol;
  require(std::abs(st.pressure - st.mean_energy - st.entropy) <=
              10.0 * 1e-12 * std::max(1.0, std::abs(st.pressure)),
          ErrorKind::diagnostic, "pressure: variational identity violated");
  return st;
}

}  // namespace detail

/// Orbit-ratio pressure estimator: P ~ log(Z_{n+1}/Z_n) with Gibbs partition
/// sums over period-m points, geometric convergence in n.  The gap between
/// consecutive ratio estimates is reported as a convergence diagnostic.
inline EquilibriumStats pressure(const SftPotential& phi, int n, int workers = 1,
                                 double warn_tol = 1e-6, std::uint64_t cap = kDefaultWordCap) {
  require(n >= 2, ErrorKind::bad_input, "pressure: need period n >= 2 for the ratio estimator");
  Aperiodicity ap = is_aperiodic(phi.spec);
  require(ap.aperiodic, ErrorKind::bad_input,
          "pressure: subshift is not aperiodic (orbit averages would not converge)");
  double lz_nm1 = sft_sweep(phi, {}, n - 1, workers, cap).log_z;
  SweepResult at_n = sft_sweep(phi, {}, n, workers, cap);
  double lz_np1 = sft_sweep(phi, {}, n + 1, workers, cap).log_z;
  return detail::ratio_stats(lz_nm1, at_n.log_z, lz_np1, at_n.mean_phi, n, warn_tol);
}

/// Log of the leading eigenvalue of the cylinder transfer matrix
/// M[w -> w'] = e^{phi(w)} over depth-k cylinders, by power iteration.
inline double pressure_matrix(const SftPotential& phi, int k, int max_cylinders = 4096) {
  require(k >= phi.depth, ErrorKind::bad_input,
          "pressure_matrix: depth must be at least the table depth");
  std::vector<std::vector<int>> cyls = enumerate_cylinders(phi.spec, k);
  require(cyls.size() <= static_cast<std::size_t>(max_cylinders), ErrorKind::resource,
          "pressure_matrix: too many depth-" + std::to_string(k) + " cylinders");
  std::size_t m = cyls.size();
  std::unordered_map<std::uint64_t, int> index;
  index.reserve(m * 2);
  auto code_of = [&](const std::vector<int>& w, int from, int len) {
    std::uint64_t code = 0;
    for (int t = 0; t < len; ++t)
      code = code * static_cast<std::uint64_t>(phi.spec.n) +
             static_cast<std::uint64_t>(w[static_cast<std::size_t>(from + t)]);
    return code;
  };
  for (std::size_t i = 0; i < m; ++i) index[code_of(cyls[i], 0, k)] = static_cast<int>(i);

  // Sparse rows: successors of w are (w_1..w_{k-1}, s) for admissible (w_{k-1}, s).
  std::vector<double> row_weight(m);
  std::vector<std::vector<int>> row_cols(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& w = cyls[i];
    std::size_t head_code = 0;
    for (int t = 0; t < phi.depth; ++t)
      head_code = head_code * static_cast<std::size_t>(phi.spec.n) +
                  static_cast<std::size_t>(w[static_cast<std::size_t>(t)]);
    row_weight[i] = std::exp(phi.dense[head_code]);
    std::uint64_t tail = (k > 1) ? code_of(w, 1, k - 1) : 0;
    int last = w[static_cast<std::size_t>(k - 1)];
    for (int s = 0; s < phi.spec.n; ++s) {
      if (!phi.spec.A[static_cast<std::size_t>(last)][static_cast<std::size_t>(s)]) continue;
      auto it = index.find(tail * static_cast<std::uint64_t>(phi.spec.n) + static_cast<std::uint64_t>(s));
      if (it != index.end()) row_cols[i].push_back(it->second);
    }
  }

  std::vector<double> v(m, 1.0 / static_cast<double>(m)), next(m);
  double lambda = 0.0;
  for (int it = 0; it < 10000; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      double push = row_weight[i] * v[i];
      for (int j : row_cols[i]) next[static_cast<std::size_t>(j)] += push;
    }
    double norm = 0.0;
    for (double x : next) norm += x;
    require(norm > 0.0 && std::isfinite(norm), ErrorKind::convergence,
            "pressure_matrix: power iteration collapsed (reducible transfer matrix?)");
    double lambda_new = norm;  // v is normalized to sum 1, so the norm is the Rayleigh ratio
    for (std::size_t i = 0; i < m; ++i) v[i] = next[i] / norm;
    if (it > 0 && std::abs(lambda_new - lambda) <= 1e-12 * std::abs(lambda_new))
      return std::log(lambda_new);
    lambda = lambda_new;
  }
  fail(ErrorKind::convergence, "pressure_matrix: power iteration did not converge in 10^4 steps");
}

struct VarianceResult {
  double value = 0.0;        // primary weighted-orbit estimator
  double cross_check = 0.0;  // second central finite difference of pressure
  double h = 0.0;
  double mean_rate = 0.0;    // equilibrium mean of psi (per symbol)
};

namespace detail {

inline double fd_h(double h, double sup_rate) {
  return (h > 0) ? h : 1e-3 * std::max(1.0, sup_rate);
}

}  // namespace detail

/// Asymptotic variance of psi under the equilibrium state of phi.  Primary
/// estimator: (1/n) weighted central second moment of S_n psi over period-n
/// points.  Cross-check: second central difference of t -> P(phi + t psi);
/// disagreement beyond max(abs_floor, rtol * scale) is a diagnostic error
/// carrying both values.
inline VarianceResult variance(const SftPotential& psi, const SftPotential& phi, int n,
                               int workers = 1, double h = 0.0, double rtol = 1e-2,
                               double abs_floor = 1e-5, std::uint64_t cap = kDefaultWordCap) {
  require(n >= 2, ErrorKind::bad_input, "variance: need period n >= 2");
  SweepResult sweep = sft_sweep(phi, {psi}, n, workers, cap);
  VarianceResult out;
  out.value = sweep.second_psi[0][0] / n;
  out.mean_rate = sweep.mean_psi[0] / n;
  out.h = detail::fd_h(h, sweep.sup_psi_rate[0]);

  SftPotential plus = linear_combine({{1.0, phi}, {out.h, psi}});
  SftPotential minus = linear_combine({{1.0, phi}, {-out.h, psi}});
  double p_plus = pressure(plus, n, workers, 1e300, cap).pressure;
  double p_zero = pressure(phi, n, workers, 1e300, cap).pressure;
  double p_minus = pressure(minus, n, workers, 1e300, cap).pressure;
  out.cross_check = (p_plus - 2.0 * p_zero + p_minus) / (out.h * out.h);

  detail::check_estimator_agreement(out.value, out.cross_check, rtol, abs_floor, "variance");
  return out;
}

struct CovarianceResult {
  double value = 0.0;
  double cross_check = 0.0;
};

/// Covariance by polarization, from one orbit sweep carrying both potentials;
/// the cross-check polarizes the finite-difference variances.
inline CovarianceResult covariance(const SftPotential& psi1, const SftPotential& psi2,
                                   const SftPotential& phi, int n, int workers = 1, double h = 0.0,
                                   double rtol = 1e-2, double abs_floor = 1e-5,
                                   std::uint64_t cap = kDefaultWordCap) {
  SweepResult sweep = sft_sweep(phi, {psi1, psi2}, n, workers, cap);
  CovarianceResult out;
  out.value = sweep.second_psi[0][1] / n;

  double h1 = detail::fd_h(h, sweep.sup_psi_rate[0]);
  double h2 = detail::fd_h(h, sweep.sup_psi_rate[1]);
  double hs = detail::fd_h(h, std::max(sweep.sup_psi_rate[0], sweep.sup_psi_rate[1]));
  double p_zero = pressure(phi, n, workers, 1e300, cap).pressure;
  auto fd_var = [&](const SftPotential& psi, double step) {
    SftPotential plus = linear_combine({{1.0, phi}, {step, psi}});
    SftPotential minus = linear_combine({{1.0, phi}, {-step, psi}});
    double p_plus = pressure(plus, n, workers, 1e300, cap).pressure;
    double p_minus = pressure(minus, n, workers, 1e300, cap).pressure;
    return (p_plus - 2.0 * p_zero + p_minus) / (step * step);
  };
  SftPotential sum = linear_combine({{1.0, psi1}, {1.0, psi2}});
  out.cross_check = 0.5 * (fd_var(sum, hs) - fd_var(psi1, h1) - fd_var(psi2, h2));

  detail::check_estimator_agreement(out.value, out.cross_check, rtol, abs_floor, "covariance");
  return out;
}

struct PressureNormResult {
  double value = 0.0;
  double variance = 0.0;
  double denominator = 0.0;  // -mean energy of phi
  double mean_rate = 0.0;    // mean of psi before centering
  double h = 0.0;
};

/// Squared pressure norm Var(psi - mean) / (-integral of phi).  Requires the
/// equilibrium energy of phi to be negative (as it is for zero-pressure
/// normalizations, where -integral phi equals the entropy).
inline PressureNormResult pressure_norm_sq(const SftPotential& psi, const SftPotential& phi, int n,
                                           int workers = 1, double h = 0.0, double rtol = 1e-2,
                                           double abs_floor = 1e-5,
                                           std::uint64_t cap = kDefaultWordCap) {
  SweepResult sweep = sft_sweep(phi, {psi}, n, workers, cap);
  double mean_rate = sweep.mean_psi[0] / n;
  SftPotential centered =
      linear_combine({{1.0, psi}, {-mean_rate, constant_potential(phi.spec, 1.0)}});
  VarianceResult var = variance(centered, phi, n, workers, h, rtol, abs_floor, cap);
  PressureNormResult out;
  out.variance = var.value;
  out.mean_rate = mean_rate;
  out.h = var.h;
  out.denominator = -sweep.mean_phi / n;
  require(out.denominator > 0.0, ErrorKind::domain,
          "pressure norm: nonpositive denominator (-mean energy must be positive; is P(phi) = 0?)");
  out.value = var.value / out.denominator;
  return out;
}

/// Max over periodic words of period <= N of |S_p psi| / p; zero exactly when
/// psi is a coboundary on the tested orbits.  Points of exact period q < p
/// contribute the same rate at level q and level p, so levels need no
/// exact-period filtering.
inline double cohomology_defect(const SftPotential& psi, int max_period, int workers = 1,
                                std::uint64_t cap = kDefaultWordCap) {
  require(max_period >= 1, ErrorKind::bad_input, "cohomology_defect: need max period >= 1");
  double worst = 0.0;
  for (int p = 1; p <= max_period; ++p) {
    ScanPlan plan = plan_word_scan(psi.spec, p, true, cap);
    std::vector<double> chunk_max(plan.prefixes.size(), 0.0);
    scan_words(psi.spec, plan, workers, [&](int c, const std::vector<int>& w) {
      chunk_max[static_cast<std::size_t>(c)] =
          std::max(chunk_max[static_cast<std::size_t>(c)], std::abs(birkhoff_sum(psi, w)));
    });
    for (double mx : chunk_max) worst = std::max(worst, mx / p);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Cycle-route sweeps: the same Gibbs machinery over a rational map's periodic
// orbits.  An orbit of exact period p contributes p fixed points of f^n
// whenever p divides n, each carrying (n/p) traversals of the orbit sums.

struct OrbitSample {
  int period = 0;
  double s_phi = 0.0;              // S_p phi over one traversal
  std::vector<double> s_psi;       // S_p psi_j over one traversal
};

inline SweepResult cycle_sweep(const std::vector<OrbitSample>& orbits, std::size_t n_psi, int n) {
  require(n >= 1, ErrorKind::bad_input, "cycle sweep: need level n >= 1");
  detail::LseAcc acc(n_psi);
  std::vector<double> s(n_psi);
  std::vector<double> sup(n_psi, 0.0);
  for (const OrbitSample& o : orbits) {
    if (o.period <= 0 || n % o.period != 0) continue;
    require(o.s_psi.size() >= n_psi, ErrorKind::bad_input, "cycle sweep: missing psi sums");
    double reps = static_cast<double>(n) / o.period;
    for (std::size_t j = 0; j < n_psi; ++j) s[j] = reps * o.s_psi[j];
    acc.add(reps * o.s_phi, s.data(), static_cast<double>(o.period));
  }
  require(acc.count > 0, ErrorKind::domain, "cycle sweep: no orbits divide the requested level");

  SweepResult out;
  out.count = acc.count;
  out.log_z = std::log(acc.z) + acc.m;
  out.mean_phi = acc.aphi / acc.z;
  out.mean_psi.resize(n_psi);
  for (std::size_t j = 0; j < n_psi; ++j) out.mean_psi[j] = acc.a[j] / acc.z;
  out.sup_psi_rate.assign(n_psi, 0.0);
  for (const OrbitSample& o : orbits) {
    if (o.period <= 0 || n % o.period != 0) continue;
    for (std::size_t j = 0; j < n_psi; ++j)
      out.sup_psi_rate[j] = std::max(out.sup_psi_rate[j], std::abs(o.s_psi[j]) / o.period);
  }

  if (n_psi > 0) {
    out.second_psi.assign(n_psi, std::vector<double>(n_psi, 0.0));
    for (const OrbitSample& o : orbits) {
      if (o.period <= 0 || n % o.period != 0) continue;
      double reps = static_cast<double>(n) / o.period;
      double wgt = o.period * std::exp(reps * o.s_phi - acc.m);
      for (std::size_t i = 0; i < n_psi; ++i)
        for (std::size_t j = i; j < n_psi; ++j)
          out.second_psi[i][j] +=
              wgt * (reps * o.s_psi[i] - out.mean_psi[i]) * (reps * o.s_psi[j] - out.mean_psi[j]);
    }
    for (std::size_t i = 0; i < n_psi; ++i)
      for (std::size_t j = i; j < n_psi; ++j) {
        out.second_psi[i][j] /= acc.z;
        out.second_psi[j][i] = out.second_psi[i][j];
      }
  }
  return out;
}

/// Ratio pressure estimator over a cycle inventory; the inventory must hold
/// every orbit of period <= n+1.
inline EquilibriumStats cycle_pressure(const std::vector<OrbitSample>& orbits, int n,
                                       double warn_tol = 1e-6) {
  require(n >= 2, ErrorKind::bad_input, "cycle pressure: need level n >= 2");
  double lz_nm1 = cycle_sweep(orbits, 0, n - 1).log_z;
  SweepResult at_n = cycle_sweep(orbits, 0, n);
  double lz_np1 = cycle_sweep(orbits, 0, n + 1).log_z;
  return detail::ratio_stats(lz_nm1, at_n.log_z, lz_np1, at_n.mean_phi, n, warn_tol);
}

/// Variance over a cycle inventory with the finite-difference cross-check run
/// on the same orbit data (phi + t psi shifts the per-orbit sums linearly).
inline VarianceResult cycle_variance(const std::vector<OrbitSample>& orbits, int n, double h = 0.0,
                                     double rtol = 1e-2, double abs_floor = 1e-5) {
  SweepResult sweep = cycle_sweep(orbits, 1, n);
  VarianceResult out;
  out.value = sweep.second_psi[0][0] / n;
  out.mean_rate = sweep.mean_psi[0] / n;
  out.h = detail::fd_h(h, sweep.sup_psi_rate[0]);

  auto shifted = [&](double t) {
    std::vector<OrbitSample> moved = orbits;
    for (OrbitSample& o : moved) o.s_phi += t * o.s_psi[0];
    return moved;
  };
  double p_plus = cycle_pressure(shifted(out.h), n, 1e300).pressure;
  double p_zero = cycle_pressure(orbits, n, 1e300).pressure;
  double p_minus = cycle_pressure(shifted(-out.h), n, 1e300).pressure;
  out.cross_check = (p_plus - 2.0 * p_zero + p_minus) / (out.h * out.h);

  detail::check_estimator_agreement(out.value, out.cross_check, rtol, abs_floor, "cycle variance");
  return out;
}

inline double cycle_cohomology_defect(const std::vector<OrbitSample>& orbits) {
  double worst = 0.0;
  for (const OrbitSample& o : orbits)
    if (o.period > 0 && !o.s_psi.empty()) worst = std::max(worst, std::abs(o.s_psi[0]) / o.period);
  return worst;
}

}  // namespace pressurelab
