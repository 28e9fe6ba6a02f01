#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "pressurelab/maps.hpp"

using namespace pressurelab;

namespace {

Poly zpow(int d) {
  Poly p(static_cast<std::size_t>(d) + 1, 0.0);
  p[static_cast<std::size_t>(d)] = 1.0;
  return p;
}

const FixedPoint* find_fp(const FixedPointsResult& r, cplx z, double tol = 1e-9) {
  for (const auto& fp : r.points)
    if (!fp.at_infinity && std::abs(fp.z - z) < tol) return &fp;
  return nullptr;
}

}  // namespace

TEST_CASE("rational map validation") {
  CHECK_THROWS_AS(poly_map(Poly{0.0, 1.0}), Error);  // degree 1
  // (z^2 - 1)/(z - 1) has a shared root.
  CHECK_THROWS_AS(make_rational(Poly{-1.0, 0.0, 1.0}, Poly{-1.0, 1.0}), Error);
  CHECK_NOTHROW(make_rational(Poly{-2.0, 0.0, 1.0}, Poly{-1.0, 1.0}));
}

TEST_CASE("evaluation and derivative match finite differences") {
  auto f = make_rational(Poly{cplx(0.1, 0.2), 0.0, cplx(1.0, -0.3), 0.5}, Poly{1.0, cplx(-0.2, 0.1), 0.3});
  SplitMix64 rng{11};
  double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    cplx z(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2));
    cplx fd = (map_eval(f, z + h) - map_eval(f, z - h)) / (2.0 * h);
    cplx d = map_deriv(f, z);
    if (!std::isfinite(fd.real())) continue;  // stepped over a pole
    CHECK(std::abs(fd - d) < 1e-6 * std::max(1.0, std::abs(d)));
  }
}

TEST_CASE("fixed points of z^d") {
  for (int d : {2, 3, 4}) {
    auto f = poly_map(zpow(d));
    auto r = fixed_points(f);
    REQUIRE(static_cast<int>(r.points.size()) == d + 1);
    int at_inf = 0, roots_of_unity = 0;
    for (const auto& fp : r.points) {
      if (fp.at_infinity) {
        ++at_inf;
        CHECK(std::abs(fp.multiplier) < 1e-15);
      } else if (std::abs(fp.z) < 1e-10) {
        CHECK(std::abs(fp.multiplier) < 1e-12);
      } else {
        ++roots_of_unity;
        CHECK(std::abs(std::pow(fp.z, d - 1) - 1.0) < 1e-10);
        CHECK(std::abs(fp.multiplier - cplx(d)) < 1e-10);
      }
    }
    CHECK(at_inf == 1);
    CHECK(roots_of_unity == d - 1);
  }
}

TEST_CASE("blaschke normal form at a = 1/2") {
  auto f = blaschke({0.5});
  CHECK(std::abs(map_deriv(f, 0.0) + 0.5) < 1e-14);

  auto r = fixed_points(f);
  REQUIRE(r.points.size() == 3);
  const FixedPoint* one = find_fp(r, 1.0);
  REQUIRE(one != nullptr);
  CHECK(std::abs(one->multiplier - 4.0) < 1e-12);  // 2/(1-a)
  CHECK(find_fp(r, 0.0) != nullptr);
  bool has_inf = false;
  for (const auto& fp : r.points) has_inf = has_inf || fp.at_infinity;
  CHECK(has_inf);

  CHECK_THROWS_AS(blaschke({cplx(1.0)}), Error);
  CHECK_THROWS_AS(blaschke({}), Error);
}

TEST_CASE("parabolic degeneration flags a multiplicity warning") {
  auto f = poly_map(Poly{0.25, 0.0, 1.0});  // z^2 + 1/4, double fixed point at 1/2
  auto r = fixed_points(f);
  CHECK(r.multiplicity_warning);
}

TEST_CASE("qb normal form fixes 0, 1, infinity") {
  QBPoint zd{{0.0, 0.0}, {0.0, 0.0}, false};
  auto f = qb(zd);
  CHECK(f.degree == 3);
  CHECK(std::abs(map_eval(f, cplx(0.7, 0.2)) - std::pow(cplx(0.7, 0.2), 3)) < 1e-14);

  SplitMix64 rng{5};
  for (int i = 0; i < 20; ++i) {
    QBPoint pt;
    int m = 1 + static_cast<int>(rng.next() % 3);
    for (int j = 0; j < m; ++j) {
      pt.a.emplace_back(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4));
      pt.b.emplace_back(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4));
    }
    auto Q = qb(pt);
    CHECK(std::abs(map_eval(Q, 1.0) - 1.0) < 1e-12);
    cplx num0 = poly_eval(Q.p, 0.0);
    CHECK(std::abs(num0) < 1e-14);
    auto fps = fixed_points(Q);
    CHECK(find_fp(fps, 0.0, 1e-10) != nullptr);
    CHECK(find_fp(fps, 1.0, 1e-10) != nullptr);
  }

  auto half = qb(QBPoint{{0.5}, {0.5}, false});
  auto fps = fixed_points(half);
  const FixedPoint* one = find_fp(fps, 1.0);
  REQUIRE(one != nullptr);
  CHECK(std::abs(one->multiplier - 4.0) < 1e-12);
}

TEST_CASE("involution is an involution and conjugates multipliers") {
  QBPoint pt{{cplx(0.3, 0.1)}, {cplx(0.2, 0.0)}, false};
  QBPoint twice = involution(involution(pt));
  CHECK(std::abs(twice.a[0] - pt.a[0]) == 0.0);
  CHECK(std::abs(twice.b[0] - pt.b[0]) == 0.0);

  auto Q = qb(pt);
  auto Qi = qb(involution(pt));
  auto fps = fixed_points(Q);
  auto fps_i = fixed_points(Qi);
  // z -> 1/conj(z) maps fixed points of Q to fixed points of Qi with
  // conjugate multipliers.
  for (const auto& fp : fps.points) {
    if (fp.at_infinity || std::abs(fp.z) < 1e-12) continue;  // 0 <-> infinity swap
    cplx mirror = 1.0 / std::conj(fp.z);
    const FixedPoint* match = find_fp(fps_i, mirror, 1e-8);
    REQUIRE(match != nullptr);
    CHECK(std::abs(match->multiplier - std::conj(fp.multiplier)) < 1e-10);
  }
}

TEST_CASE("blaschke locus detection") {
  CHECK(is_blaschke_point(QBPoint{{0.5}, {0.5}, false}).is_blaschke);
  CHECK(is_blaschke_point(QBPoint{{cplx(0.3, 0.1)}, {cplx(0.3, -0.1)}, false}).is_blaschke);
  CHECK_FALSE(is_blaschke_point(QBPoint{{0.3}, {0.35}, false}, 1e-6).is_blaschke);

  // Permuted pairing.
  QBPoint perm{{cplx(0.2, 0.0), cplx(0.0, 0.4)}, {cplx(0.0, -0.4), cplx(0.2, 0.0)}, false};
  auto res = is_blaschke_point(perm);
  REQUIRE(res.is_blaschke);
  CHECK(res.pairing == std::vector<int>{1, 0});
  auto aligned = align_blaschke(perm);
  for (std::size_t j = 0; j < aligned.a.size(); ++j)
    CHECK(std::abs(aligned.b[j] - std::conj(aligned.a[j])) < 1e-12);

  // Two parameters closer than tol makes the pairing ambiguous.
  QBPoint amb{{0.3, 0.3 + 1e-12}, {0.3, 0.3}, false};
  CHECK_THROWS_AS(is_blaschke_point(amb), Error);

  QBPoint pt{{cplx(0.3, 0.1)}, {cplx(0.2, 0.0)}, false};
  CHECK(is_blaschke_point(involution(pt)).is_blaschke == is_blaschke_point(pt).is_blaschke);
}

TEST_CASE("tangent decomposition") {
  QBPoint pt{{cplx(0.3, 0.1)}, {cplx(0.3, -0.1)}, false};

  // Already tangent to the Blaschke locus: nothing in the J part.
  TangentVector tangent{{cplx(0.4, -0.2)}, {cplx(0.4, 0.2)}};
  auto split = tangent_decompose(pt, tangent);
  CHECK(std::abs(split.tangential.da[0] - tangent.da[0]) == 0.0);
  CHECK(std::abs(split.normal.da[0]) == 0.0);

  // Pure J-direction: nothing in the tangential part.
  TangentVector jdir{{cplx(0.4, -0.2) * cplx(0.0, 1.0)}, {cplx(0.4, 0.2) * cplx(0.0, 1.0)}};
  auto jsplit = tangent_decompose(pt, jdir);
  CHECK(std::abs(jsplit.tangential.da[0]) == 0.0);
  CHECK(std::abs(jsplit.normal.da[0] - cplx(0.4, -0.2)) == 0.0);

  SplitMix64 rng{17};
  for (int i = 0; i < 100; ++i) {
    TangentVector v{{cplx(rng.uniform(-1, 1), rng.uniform(-1, 1))},
                    {cplx(rng.uniform(-1, 1), rng.uniform(-1, 1))}};
    auto s = tangent_decompose(pt, v);
    // Both parts are tangent to the locus.
    CHECK(std::abs(s.tangential.db[0] - std::conj(s.tangential.da[0])) == 0.0);
    CHECK(std::abs(s.normal.db[0] - std::conj(s.normal.da[0])) == 0.0);
    // Exact reassembly: v = w1 + J w2.
    cplx ra = s.tangential.da[0] + cplx(0.0, 1.0) * s.normal.da[0];
    cplx rb = s.tangential.db[0] + cplx(0.0, 1.0) * s.normal.db[0];
    CHECK(std::abs(ra - v.da[0]) < 1e-16);
    CHECK(std::abs(rb - v.db[0]) < 1e-16);
    // Idempotence: decomposing the tangential part changes nothing.
    auto again = tangent_decompose(pt, s.tangential);
    CHECK(std::abs(again.tangential.da[0] - s.tangential.da[0]) == 0.0);
    CHECK(std::abs(again.normal.da[0]) == 0.0);
  }

  QBPoint off{{0.3}, {0.35}, false};
  CHECK_THROWS_AS(tangent_decompose(off, tangent), Error);
}

TEST_CASE("circle lift of z^d is linear") {
  auto lift = circle_lift({0.0});
  CHECK(lift.d == 2);
  CHECK(lift_eval(lift, 0.7) == Catch::Approx(1.4).margin(1e-15));
  CHECK(lift_deriv(lift, 0.7) == Catch::Approx(2.0).margin(1e-15));
}

TEST_CASE("circle cycles of z^2") {
  auto lift = circle_lift({0.0});
  auto period1 = circle_cycles(lift, 1);
  REQUIRE(period1.size() == 1);
  CHECK(std::abs(period1[0].points[0] - 1.0) < 1e-12);
  CHECK(std::abs(period1[0].multiplier - 2.0) < 1e-12);

  auto period2 = circle_cycles(lift, 2);
  REQUIRE(period2.size() == 2);
  CHECK(period2[0].period == 1);
  CHECK(period2[1].period == 2);
  CHECK(std::abs(period2[1].multiplier - 4.0) < 1e-12);
  // The 2-cycle is the pair of primitive cube roots of unity.
  cplx w = std::polar(1.0, kTwoPi / 3.0);
  double d0 = std::abs(period2[1].points[0] - w) + std::abs(period2[1].points[1] - w * w);
  double d1 = std::abs(period2[1].points[0] - w * w) + std::abs(period2[1].points[1] - w);
  CHECK(std::min(d0, d1) < 1e-12);
}

TEST_CASE("circle cycles of a blaschke product are complete and repelling") {
  auto f = blaschke({0.3});
  auto lift = circle_lift({0.3});
  for (int n = 1; n <= 3; ++n) {
    auto cycles = circle_cycles(lift, n);
    std::int64_t covered = 0;
    for (const auto& c : cycles) covered += c.period;
    CHECK(covered == (1 << n) - 1);  // d^n - 1 with d = 2
  }

  auto cycles = circle_cycles(lift, 6);
  for (const auto& c : cycles) {
    CHECK(c.repelling);
    CHECK(std::abs(c.multiplier.imag()) == 0.0);
    CHECK(c.multiplier.real() > 1.0);
    cplx prod = 1.0;
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      CHECK(std::abs(std::abs(c.points[i]) - 1.0) < 1e-10);
      // The lift solves the cycle equation for the actual map.
      cplx next = c.points[(i + 1) % c.points.size()];
      CHECK(std::abs(map_eval(f, c.points[i]) - next) < 1e-10);
      prod *= map_deriv(f, c.points[i]);
    }
    // Euclidean multiplier agrees with the lift-derivative product.
    CHECK(std::abs(prod - c.multiplier) < 1e-9 * std::abs(c.multiplier));
  }
}

TEST_CASE("circle cycles respect worker count and caps") {
  auto lift = circle_lift({cplx(0.2, 0.1)}, std::polar(1.0, 0.4));
  auto c1 = circle_cycles(lift, 8, 1);
  auto c8 = circle_cycles(lift, 8, 8);
  REQUIRE(c1.size() == c8.size());
  for (std::size_t i = 0; i < c1.size(); ++i) {
    CHECK(c1[i].period == c8[i].period);
    for (std::size_t j = 0; j < c1[i].points.size(); ++j) {
      CHECK(c1[i].points[j].real() == c8[i].points[j].real());
      CHECK(c1[i].points[j].imag() == c8[i].points[j].imag());
    }
  }
  CHECK_THROWS_AS(circle_cycles(lift, 30, 1, 1000), Error);
}

TEST_CASE("critical points") {
  auto crit_sq = critical_points(poly_map(zpow(2)));
  REQUIRE(crit_sq.size() == 1);
  CHECK(std::abs(crit_sq[0]) < 1e-14);

  // Blaschke critical points come in z <-> 1/conj(z) pairs.
  auto crit = critical_points(blaschke({0.5}));
  REQUIRE(crit.size() == 2);
  CHECK(std::abs(crit[0] * std::conj(crit[1]) - 1.0) < 1e-10);
}

TEST_CASE("component certification") {
  CHECK(certify_component(QBPoint{{0.0}, {0.0}, false}).status == CertifyStatus::certified);
  CHECK(certify_component(QBPoint{{cplx(0.0, 0.1)}, {cplx(0.05, 0.0)}, false}).status ==
        CertifyStatus::certified);
  CHECK(certify_component(QBPoint{{0.3}, {0.3}, false}).status == CertifyStatus::certified);

  // Repelling fixed point at the origin: certified out of the component.
  auto refuted = certify_component(QBPoint{{0.8}, {-0.9}, false});
  CHECK(refuted.status == CertifyStatus::refuted);

  // Extreme parameters cannot be certified by the coefficient bound; the
  // contract is only that they are never certified incorrectly.
  auto stress = certify_component(QBPoint{{0.99}, {0.99}, false});
  CHECK(stress.status != CertifyStatus::refuted);
}
