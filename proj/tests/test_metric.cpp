#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "pressurelab/common.hpp"
#include "pressurelab/continuation.hpp"
#include "pressurelab/maps.hpp"
#include "pressurelab/metric.hpp"

using namespace pressurelab;

namespace {

struct HasKind : Catch::Matchers::MatcherGenericBase {
  ErrorKind kind;
  explicit HasKind(ErrorKind k) : kind(k) {}
  bool match(const Error& e) const { return e.kind() == kind; }
  std::string describe() const override { return "has the expected error kind"; }
};

QBPoint real_point(std::vector<double> a) {
  QBPoint pt;
  for (double x : a) {
    pt.a.push_back(x);
    pt.b.push_back(x);
  }
  pt.validated = true;
  return pt;
}

MultiplierTable power_map_table(int d, int max_period) {
  std::vector<cplx> zeros(static_cast<std::size_t>(d - 1), 0.0);
  std::vector<Cycle> cycles = circle_cycles_upto(circle_lift(zeros), max_period, 4);
  return multiplier_table(cycles, max_period);
}

}  // namespace

TEST_CASE("determinant pressure of z^d matches (1 - s) log d") {
  for (int d : {2, 3}) {
    MultiplierTable tab = power_map_table(d, 10);
    for (double s : {0.7, 1.0, 1.3}) {
      PressureEval p = det_pressure(tab, s);
      CHECK(std::abs(p.value - (1.0 - s) * std::log(d)) < 1e-10);
      CHECK(std::abs(p.d_ds + std::log(d)) < 1e-8);
    }
  }
}

TEST_CASE("determinant pressure derivative matches a finite difference") {
  QBPoint pt = real_point({0.3});
  std::vector<Cycle> cycles = circle_cycles_upto(circle_lift_qb(pt), 10, 4);
  MultiplierTable tab = multiplier_table(cycles, 10);
  double h = 1e-5;
  double fd = (det_pressure(tab, 1.0 + h).value - det_pressure(tab, 1.0 - h).value) / (2.0 * h);
  CHECK(std::abs(det_pressure(tab, 1.0).d_ds - fd) < 1e-6);
  CHECK(lyapunov_exponent(tab, 1.0) > 0.0);
}

TEST_CASE("dimension of the power maps is exactly one") {
  for (int d : {2, 3}) {
    DimensionResult res = bowen_dimension(power_map_table(d, 10));
    CHECK(std::abs(res.delta - 1.0) < 1e-10);
    CHECK(res.residual < 1e-12);
    CHECK(res.lo <= res.delta);
    CHECK(res.delta <= res.hi);
    CHECK(res.period_used == 10);
  }
}

TEST_CASE("dimension of a Blaschke product is one") {
  QBPoint pt = real_point({0.3});
  DimensionResult res = hausdorff_dimension(pt, 12, 4);
  CHECK(std::abs(res.delta - 1.0) < 1e-6);

  // Super-exponential convergence: the period cap barely matters.
  DimensionResult coarse = hausdorff_dimension(pt, 8, 4);
  CHECK(std::abs(coarse.delta - res.delta) < 1e-8);
}

TEST_CASE("dimension of z^2 + c follows the quadratic response") {
  DimensionResult d05 = hausdorff_dimension(Poly{0.05, 0.0, 1.0}, 12, 4);
  CHECK(std::abs(d05.delta - (1.0 + 0.05 * 0.05 / (4.0 * std::log(2.0)))) < 5e-4);

  DimensionResult d10 = hausdorff_dimension(Poly{0.1, 0.0, 1.0}, 12, 4);
  CHECK(std::abs(d10.delta - (1.0 + 0.1 * 0.1 / (4.0 * std::log(2.0)))) < 1e-3);

  CHECK(d10.delta > d05.delta);
  CHECK(d05.delta > 1.0 + 1e-5);
}

TEST_CASE("non-repelling and corrupt multiplier data are rejected") {
  Cycle c;
  c.period = 1;
  c.points = {cplx(0.0)};
  c.multiplier = 0.5;
  CHECK_THROWS_MATCHES(multiplier_table({c}, 4), Error, HasKind(ErrorKind::domain));

  // A contracting trace table makes the pressure increase in s.
  MultiplierTable bad;
  bad.max_period = 6;
  bad.orbits = {{1, -0.5, 0.0}};
  CHECK_THROWS_MATCHES(bowen_dimension(bad), Error, HasKind(ErrorKind::domain));

  // Uniformly huge multipliers push the dimension below the bracket.
  MultiplierTable cold;
  cold.max_period = 6;
  cold.orbits = {{1, 30.0, 0.0}};
  CHECK_THROWS_MATCHES(bowen_dimension(cold), Error, HasKind(ErrorKind::convergence));
}

TEST_CASE("transported pairs keep the orbit pairing") {
  QBPoint from = real_point({0.0});
  QBPoint to = real_point({0.2});
  std::vector<PairedOrbit> pairs = transport_pairs(qb_segment(from, to), 8, 1.0, 4);
  std::vector<Cycle> seeds = circle_cycles_upto(circle_lift_qb(from), 8, 4);
  REQUIRE(pairs.size() == seeds.size());
  int fixed = 0;
  for (const PairedOrbit& o : pairs) {
    CHECK(o.l_target > 0.0);
    if (o.period == 1) {
      ++fixed;
      CHECK(std::abs(o.l_base - std::log(2.0)) < 1e-12);
      CHECK(std::abs(o.l_target - std::log(2.5)) < 1e-10);
    }
  }
  CHECK(fixed == 1);
}

TEST_CASE("level Gibbs functional of z^2 has the closed form") {
  QBPoint pt = real_point({0.0});
  std::vector<PairedOrbit> pairs = transport_pairs(qb_segment(pt, pt), 12, 0.0, 4);
  GFunctionalResult base = g_functional_base(pairs, 12);
  double expected = std::log(4095.0) / 12.0;  // level-12 Bowen root times log 2
  CHECK(std::abs(base.value - expected) < 1e-12);
  CHECK(std::abs(base.lyapunov - std::log(2.0)) < 1e-12);
  CHECK(std::abs(base.value - std::log(2.0)) < 1e-4);
}

TEST_CASE("the Gibbs functional is minimized at the base map") {
  QBPoint f = real_point({0.3});
  SplitMix64 rng(0x6d65747269636aULL);
  auto unit = [&]() { return 2.0 * (static_cast<double>(rng.next() >> 11) * 0x1.0p-53) - 1.0; };
  for (int trial = 0; trial < 5; ++trial) {
    QBPoint g = f;
    g.a[0] += 1e-2 * cplx(unit(), unit()) / std::sqrt(2.0);
    g.b[0] += 1e-2 * cplx(unit(), unit()) / std::sqrt(2.0);
    std::vector<PairedOrbit> pairs = transport_pairs(qb_segment(f, g), 12, 1.0, 4);
    GFunctionalResult at_g = g_functional(pairs, 12);
    GFunctionalResult at_f = g_functional_base(pairs, 12);
    CHECK(at_g.value >= at_f.value - 1e-12);
  }
}

TEST_CASE("dimension is stationary and bounded below along tangent lines") {
  QBPoint pt = real_point({0.5});
  TangentVector blaschke{{cplx(1.0)}, {cplx(1.0)}};
  TangentVector jdir{{cplx(0.0, 1.0)}, {cplx(0.0, 1.0)}};
  CHECK(std::abs(dimension_derivative(pt, blaschke, 1e-3, 10, 4)) < 1e-4);
  CHECK(std::abs(dimension_derivative(pt, jdir, 1e-3, 10, 4)) < 1e-4);

  for (double t : {-0.05, 0.02, 0.05}) {
    MapPath path = qb_tangent(pt, jdir, 0.1);
    DimensionResult res = hausdorff_dimension(path, t, 10, 4);
    CHECK(res.delta >= 1.0 - 1e-9);
  }
}

TEST_CASE("seminorm separates the complex-structure direction") {
  QBPoint pt = real_point({0.5});
  TangentVector blaschke{{cplx(1.0)}, {cplx(1.0)}};
  TangentVector jdir{{cplx(0.0, 1.0)}, {cplx(0.0, 1.0)}};

  SeminormResult along = pressure_seminorm(pt, blaschke, 10, 1e-4, 4);
  CHECK(along.value > 1e-3);
  CHECK(along.denominator > 0.0);
  CHECK(std::abs(along.delta0 - 1.0) < 1e-8);
  CHECK(std::abs(along.d_delta) < 1e-4);
  bool found_fixed = false;
  for (const CycleDerivative& row : along.table)
    if (row.period == 1) {
      found_fixed = true;
      CHECK(std::abs(row.multiplier - cplx(4.0)) < 1e-9);
      CHECK(std::abs(row.entry - 2.0) < 1e-3);
    }
  CHECK(found_fixed);

  SeminormResult across = pressure_seminorm(pt, jdir, 10, 1e-4, 4);
  CHECK(across.value < 1e-5);
  for (const CycleDerivative& row : across.table) CHECK(std::abs(row.entry) < 1e-4);
}

TEST_CASE("seminorm scales homogeneously in the direction") {
  QBPoint pt = real_point({0.5});
  TangentVector dir{{cplx(1.0)}, {cplx(1.0)}};
  SeminormResult base = pressure_seminorm(pt, dir, 8, 1e-4, 4);
  for (double c : {2.0, -1.0, 0.5}) {
    SeminormResult scaled = pressure_seminorm(pt, tangent_scale(dir, c), 8, 1e-4, 4);
    CHECK(scaled.value == Catch::Approx(c * c * base.value).epsilon(1e-6));
  }
}

TEST_CASE("pressure form polarizes the seminorm") {
  QBPoint pt = real_point({0.5});
  TangentVector u{{cplx(1.0)}, {cplx(1.0)}};
  TangentVector v{{cplx(0.0, 1.0)}, {cplx(0.0, -1.0)}};

  FormResult uu = pressure_form(pt, u, u, 8, 1e-4, 4);
  SeminormResult su = pressure_seminorm(pt, u, 8, 1e-4, 4);
  CHECK(uu.value == Catch::Approx(su.value).epsilon(1e-9));

  FormResult uv = pressure_form(pt, u, v, 8, 1e-4, 4);
  FormResult vu = pressure_form(pt, v, u, 8, 1e-4, 4);
  CHECK(std::abs(uv.value - vu.value) < 1e-12);

  // Bilinearity in the second slot.
  TangentVector w = tangent_add(u, v);
  FormResult uw = pressure_form(pt, u, w, 8, 1e-4, 4);
  CHECK(uw.value == Catch::Approx(uv.value + uu.value).epsilon(1e-4).margin(1e-8));

  FormResult u2v = pressure_form(pt, tangent_scale(u, 2.0), v, 8, 1e-4, 4);
  CHECK(u2v.value == Catch::Approx(2.0 * uv.value).epsilon(1e-4).margin(1e-8));
}

TEST_CASE("degeneracy scan issues the three verdicts") {
  QBPoint pt = real_point({0.5});
  TangentVector blaschke{{cplx(1.0)}, {cplx(1.0)}};
  TangentVector jdir{{cplx(0.0, 1.0)}, {cplx(0.0, 1.0)}};

  ScanResult strong = degeneracy_scan(pt, blaschke, 8, 1e-4, 1e-4, 4);
  CHECK(strong.verdict == Verdict::nondegenerate);
  CHECK(strong.max_entry > 2.0 - 1e-3);
  CHECK(strong.tracked == strong.attempted);
  for (const CycleDerivative& row : strong.table)
    if (row.period == 1) CHECK(std::abs(row.entry - 2.0) < 1e-3);

  ScanResult flat = degeneracy_scan(pt, jdir, 8, 1e-4, 1e-4, 4);
  CHECK(flat.verdict == Verdict::degenerate);
  CHECK(flat.max_entry < 1e-4);

  // A max entry inside the (tol, 10 tol] hysteresis band is inconclusive by
  // design; entries are 1-homogeneous in the direction, so scaling the strong
  // direction down to a unit max entry lands inside the band for tol = 0.3.
  ScanResult middle =
      degeneracy_scan(pt, tangent_scale(blaschke, 1.0 / strong.max_entry), 8, 1e-4, 0.3, 4);
  CHECK(middle.verdict == Verdict::inconclusive);
  CHECK(std::string(verdict_name(middle.verdict)) == "INCONCLUSIVE");
}

TEST_CASE("locus check at a Blaschke point") {
  QBPoint pt = real_point({0.5});
  TangentVector blaschke{{cplx(1.0)}, {cplx(1.0)}};
  TangentVector jdir{{cplx(0.0, 1.0)}, {cplx(0.0, 1.0)}};
  LocusReport report = check_degeneracy_locus(pt, {blaschke, jdir}, 8, 10, 1e-4, 4);
  CHECK(report.blaschke);
  CHECK(report.pass);
  CHECK(std::abs(report.delta - 1.0) < 1e-6);
  REQUIRE(report.directions.size() == 2);
  CHECK(report.directions[0].verdict == Verdict::nondegenerate);
  CHECK(report.directions[0].tangential_norm > 1.0);
  CHECK(report.directions[1].verdict == Verdict::degenerate);
  CHECK(report.directions[1].pure_j);
  CHECK(report.directions[1].tb_seminorm_sq == 0.0);
  CHECK(report.inconclusive.empty());
}

TEST_CASE("locus check off the Blaschke locus") {
  QBPoint pt;
  pt.a = {cplx(0.3, 0.1)};
  pt.b = {cplx(0.2)};
  pt.validated = true;
  TangentVector d1{{cplx(1.0)}, {cplx(0.0)}};
  TangentVector d2{{cplx(0.0)}, {cplx(1.0)}};
  TangentVector d3{{cplx(0.0, 1.0)}, {cplx(0.0, -0.5)}};
  LocusReport report = check_degeneracy_locus(pt, {d1, d2, d3}, 8, 10, 1e-4, 4);
  CHECK_FALSE(report.blaschke);
  CHECK(report.delta > 1.0 + 1e-5);
  CHECK(report.has_nonreal_repelling);
  for (const DirectionReport& dr : report.directions)
    CHECK(dr.verdict != Verdict::degenerate);
  CHECK(report.pass);

  QBPoint unvalidated = pt;
  unvalidated.validated = false;
  CHECK_THROWS_MATCHES(check_degeneracy_locus(unvalidated, {d1}, 6, 8, 1e-4, 2), Error,
                       HasKind(ErrorKind::bad_input));
}
