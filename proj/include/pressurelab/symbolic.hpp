#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pressurelab/common.hpp"
#include "pressurelab/parallel.hpp"

namespace pressurelab {

/// Subshift of finite type on the alphabet {0,...,n-1} with 0/1 transition
/// matrix A: the word i0 i1 ... is admissible when A[i0][i1] = A[i1][i2] = 1.
struct SubshiftSpec {
  int n = 0;
  std::vector<std::vector<int>> A;
};

inline void validate_subshift(const SubshiftSpec& spec) {
  require(spec.n >= 1, ErrorKind::bad_input, "subshift: alphabet size must be positive");
  require(static_cast<int>(spec.A.size()) == spec.n, ErrorKind::bad_input,
          "subshift: A must be n x n");
  std::vector<int> col_sum(static_cast<std::size_t>(spec.n), 0);
  for (int i = 0; i < spec.n; ++i) {
    const auto& row = spec.A[static_cast<std::size_t>(i)];
    require(static_cast<int>(row.size()) == spec.n, ErrorKind::bad_input,
            "subshift: A must be n x n");
    int row_sum = 0;
    for (int j = 0; j < spec.n; ++j) {
      int a = row[static_cast<std::size_t>(j)];
      require(a == 0 || a == 1, ErrorKind::bad_input, "subshift: entries must be 0 or 1");
      row_sum += a;
      col_sum[static_cast<std::size_t>(j)] += a;
    }
    require(row_sum > 0, ErrorKind::bad_input, "subshift: row of zeros (dead symbol)");
  }
  for (int j = 0; j < spec.n; ++j)
    require(col_sum[static_cast<std::size_t>(j)] > 0, ErrorKind::bad_input,
            "subshift: column of zeros (unreachable symbol)");
}

inline std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a + b;
  return s < a ? ~std::uint64_t{0} : s;
}

inline std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > (~std::uint64_t{0}) / b) return ~std::uint64_t{0};
  return a * b;
}

using U64Mat = std::vector<std::vector<std::uint64_t>>;

inline U64Mat to_u64_mat(const SubshiftSpec& spec) {
  U64Mat M(static_cast<std::size_t>(spec.n),
           std::vector<std::uint64_t>(static_cast<std::size_t>(spec.n), 0));
  for (int i = 0; i < spec.n; ++i)
    for (int j = 0; j < spec.n; ++j)
      M[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          static_cast<std::uint64_t>(spec.A[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
  return M;
}

inline U64Mat mat_mul_sat(const U64Mat& X, const U64Mat& Y) {
  std::size_t n = X.size();
  U64Mat Z(n, std::vector<std::uint64_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      std::uint64_t x = X[i][k];
      if (x == 0) continue;
      for (std::size_t j = 0; j < n; ++j)
        Z[i][j] = sat_add(Z[i][j], sat_mul(x, Y[k][j]));
    }
  return Z;
}

inline U64Mat mat_pow_sat(U64Mat M, int e) {
  std::size_t n = M.size();
  U64Mat R(n, std::vector<std::uint64_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i) R[i][i] = 1;
  while (e > 0) {
    if (e & 1) R = mat_mul_sat(R, M);
    M = mat_mul_sat(M, M);
    e >>= 1;
  }
  return R;
}

/// Number of admissible words of length k, i.e. the sum of the entries of
/// A^(k-1).  Saturates at 2^64-1 instead of overflowing.
inline std::uint64_t count_cylinders(const SubshiftSpec& spec, int k) {
  require(k >= 1, ErrorKind::bad_input, "count_cylinders: length must be >= 1");
  if (k == 1) return static_cast<std::uint64_t>(spec.n);
  U64Mat P = mat_pow_sat(to_u64_mat(spec), k - 1);
  std::uint64_t total = 0;
  for (const auto& row : P)
    for (std::uint64_t v : row) total = sat_add(total, v);
  return total;
}

/// Number of fixed points of the n-th shift power, trace(A^n).
inline std::uint64_t count_periodic_points(const SubshiftSpec& spec, int m) {
  require(m >= 1, ErrorKind::bad_input, "count_periodic_points: period must be >= 1");
  U64Mat P = mat_pow_sat(to_u64_mat(spec), m);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < P.size(); ++i) total = sat_add(total, P[i][i]);
  return total;
}

struct Aperiodicity {
  bool aperiodic = false;
  int power = 0;  // least k with A^k entrywise positive, when aperiodic
};

/// Primitivity test via boolean matrix powers.  The Wielandt bound caps the
/// search at k = n^2: if no power up to there is entrywise positive, none is.
inline Aperiodicity is_aperiodic(const SubshiftSpec& spec) {
  validate_subshift(spec);
  std::size_t n = static_cast<std::size_t>(spec.n);
  std::vector<std::vector<bool>> B(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) B[i][j] = spec.A[i][j] != 0;
  auto all_positive = [&](const std::vector<std::vector<bool>>& M) {
    for (const auto& row : M)
      for (bool v : row)
        if (!v) return false;
    return true;
  };
  std::vector<std::vector<bool>> P = B;
  int limit = spec.n * spec.n;
  for (int k = 1; k <= limit; ++k) {
    if (all_positive(P)) return {true, k};
    std::vector<std::vector<bool>> Q(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < n; ++l) {
        if (!P[i][l]) continue;
        for (std::size_t j = 0; j < n; ++j)
          if (B[l][j]) Q[i][j] = true;
      }
    P = std::move(Q);
  }
  return {false, 0};
}

inline bool word_admissible(const SubshiftSpec& spec, const std::vector<int>& w) {
  if (w.empty()) return false;
  for (int s : w)
    if (s < 0 || s >= spec.n) return false;
  for (std::size_t i = 0; i + 1 < w.size(); ++i)
    if (!spec.A[static_cast<std::size_t>(w[i])][static_cast<std::size_t>(w[i + 1])]) return false;
  return true;
}

inline bool word_admissible_cyclic(const SubshiftSpec& spec, const std::vector<int>& w) {
  if (!word_admissible(spec, w)) return false;
  return spec.A[static_cast<std::size_t>(w.back())][static_cast<std::size_t>(w.front())] != 0;
}

/// Minimal period of the bi-infinite repetition of w; always divides w.size().
inline int exact_word_period(const std::vector<int>& w) {
  int k = static_cast<int>(w.size());
  for (int p = 1; p <= k; ++p) {
    if (k % p != 0) continue;
    bool ok = true;
    for (int i = p; i < k && ok; ++i) ok = w[static_cast<std::size_t>(i)] == w[static_cast<std::size_t>(i % p)];
    if (ok) return p;
  }
  return k;
}

constexpr std::uint64_t kDefaultWordCap = 10000000;

/// Fixed chunk grid for a word sweep: every word of the sweep extends exactly
/// one prefix, chunks are in lexicographic prefix order, and within a chunk
/// words are produced in lexicographic order.  The grid depends only on the
/// subshift and the word length, never on the worker count.
struct ScanPlan {
  int length = 0;
  bool cyclic = false;
  std::uint64_t total = 0;  // exact expected word count
  int prefix_len = 0;
  std::vector<std::vector<int>> prefixes;
};

namespace detail {

inline void lex_words(const SubshiftSpec& spec, int len,
                      const std::function<void(const std::vector<int>&)>& out) {
  std::vector<int> w;
  w.reserve(static_cast<std::size_t>(len));
  std::function<void()> rec = [&] {
    if (static_cast<int>(w.size()) == len) {
      out(w);
      return;
    }
    for (int j = 0; j < spec.n; ++j) {
      if (!w.empty() && !spec.A[static_cast<std::size_t>(w.back())][static_cast<std::size_t>(j)])
        continue;
      w.push_back(j);
      rec();
      w.pop_back();
    }
  };
  rec();
}

/// Boolean reachability powers: reach[r][i][j] says there is an admissible
/// path of exactly r edges from i to j, for r = 0..rmax.
inline std::vector<std::vector<std::vector<bool>>> reach_powers(const SubshiftSpec& spec, int rmax) {
  std::size_t n = static_cast<std::size_t>(spec.n);
  std::vector<std::vector<std::vector<bool>>> reach;
  reach.reserve(static_cast<std::size_t>(rmax) + 1);
  std::vector<std::vector<bool>> I(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) I[i][i] = true;
  reach.push_back(I);
  for (int r = 1; r <= rmax; ++r) {
    std::vector<std::vector<bool>> Q(n, std::vector<bool>(n, false));
    const auto& P = reach.back();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < n; ++l) {
        if (!P[i][l]) continue;
        for (std::size_t j = 0; j < n; ++j)
          if (spec.A[l][j]) Q[i][j] = true;
      }
    reach.push_back(std::move(Q));
  }
  return reach;
}

}  // namespace detail

inline ScanPlan plan_word_scan(const SubshiftSpec& spec, int length, bool cyclic,
                               std::uint64_t cap = kDefaultWordCap) {
  validate_subshift(spec);
  require(length >= 1, ErrorKind::bad_input, "word scan: length must be >= 1");
  ScanPlan plan;
  plan.length = length;
  plan.cyclic = cyclic;
  plan.total = cyclic ? count_periodic_points(spec, length) : count_cylinders(spec, length);
  if (plan.total > cap)
    fail(ErrorKind::resource, "word scan: " + std::to_string(plan.total) +
                                  " words exceed the cap of " + std::to_string(cap));
  int L = 1;
  while (L < length && count_cylinders(spec, L) < 256) ++L;
  plan.prefix_len = L;
  detail::lex_words(spec, L, [&](const std::vector<int>& w) { plan.prefixes.push_back(w); });
  return plan;
}

/// Runs visit(chunk, word) over every admissible word of the plan.  Chunks may
/// run on different threads; a single chunk runs on one thread, in
/// lexicographic word order.  visit must be safe to call concurrently for
/// distinct chunks.
inline void scan_words(const SubshiftSpec& spec, const ScanPlan& plan, int workers,
                       const std::function<void(int, const std::vector<int>&)>& visit) {
  int k = plan.length;
  auto reach = detail::reach_powers(spec, plan.cyclic ? k : 0);
  run_chunks(static_cast<int>(plan.prefixes.size()), workers, [&](int c) {
    std::vector<int> w = plan.prefixes[static_cast<std::size_t>(c)];
    if (static_cast<int>(w.size()) > k) return;
    if (plan.cyclic) {
      // A prefix can only start periodic words when the remaining letters can
      // route back to the first one.
      int first = w.front();
      for (std::size_t i = 0; i + 1 < w.size(); ++i)
        if (!spec.A[static_cast<std::size_t>(w[i])][static_cast<std::size_t>(w[i + 1])]) return;
      if (!reach[static_cast<std::size_t>(k - static_cast<int>(w.size()) + 1)]
                [static_cast<std::size_t>(w.back())][static_cast<std::size_t>(first)])
        return;
      std::function<void()> rec = [&] {
        if (static_cast<int>(w.size()) == k) {
          visit(c, w);
          return;
        }
        int remaining = k - static_cast<int>(w.size());  // letters still to place
        for (int j = 0; j < spec.n; ++j) {
          if (!spec.A[static_cast<std::size_t>(w.back())][static_cast<std::size_t>(j)]) continue;
          if (!reach[static_cast<std::size_t>(remaining)][static_cast<std::size_t>(j)]
                    [static_cast<std::size_t>(first)])
            continue;
          w.push_back(j);
          rec();
          w.pop_back();
        }
      };
      rec();
    } else {
      for (std::size_t i = 0; i + 1 < w.size(); ++i)
        if (!spec.A[static_cast<std::size_t>(w[i])][static_cast<std::size_t>(w[i + 1])]) return;
      std::function<void()> rec = [&] {
        if (static_cast<int>(w.size()) == k) {
          visit(c, w);
          return;
        }
        for (int j = 0; j < spec.n; ++j) {
          if (!spec.A[static_cast<std::size_t>(w.back())][static_cast<std::size_t>(j)]) continue;
          w.push_back(j);
          rec();
          w.pop_back();
        }
      };
      rec();
    }
  });
}

/// All admissible words of length k, lexicographically sorted.
inline std::vector<std::vector<int>> enumerate_cylinders(const SubshiftSpec& spec, int k,
                                                         std::uint64_t cap = kDefaultWordCap,
                                                         int workers = 1) {
  ScanPlan plan = plan_word_scan(spec, k, false, cap);
  std::vector<std::vector<std::vector<int>>> slots(plan.prefixes.size());
  scan_words(spec, plan, workers,
             [&](int c, const std::vector<int>& w) { slots[static_cast<std::size_t>(c)].push_back(w); });
  std::vector<std::vector<int>> out;
  out.reserve(static_cast<std::size_t>(plan.total));
  for (auto& s : slots)
    for (auto& w : s) out.push_back(std::move(w));
  require(out.size() == plan.total, ErrorKind::diagnostic,
          "enumerate_cylinders: enumeration disagrees with the matrix count");
  return out;
}

/// One length-n word per fixed point of the n-th shift power, lexicographically
/// sorted.  With exact_only, keeps only words whose minimal period is n.
inline std::vector<std::vector<int>> enumerate_periodic_words(const SubshiftSpec& spec, int n,
                                                              std::uint64_t cap = kDefaultWordCap,
                                                              int workers = 1,
                                                              bool exact_only = false) {
  ScanPlan plan = plan_word_scan(spec, n, true, cap);
  std::vector<std::vector<std::vector<int>>> slots(plan.prefixes.size());
  scan_words(spec, plan, workers,
             [&](int c, const std::vector<int>& w) { slots[static_cast<std::size_t>(c)].push_back(w); });
  std::vector<std::vector<int>> out;
  out.reserve(static_cast<std::size_t>(plan.total));
  for (auto& s : slots)
    for (auto& w : s) out.push_back(std::move(w));
  require(out.size() == plan.total, ErrorKind::diagnostic,
          "enumerate_periodic_words: enumeration disagrees with trace(A^n)");
  if (exact_only) {
    std::vector<std::vector<int>> filtered;
    for (auto& w : out)
      if (exact_word_period(w) == n) filtered.push_back(std::move(w));
    out = std::move(filtered);
  }
  return out;
}

}  // namespace pressurelab
