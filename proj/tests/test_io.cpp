#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "pressurelab/io.hpp"

using namespace pressurelab;

namespace {

struct HasKind : Catch::Matchers::MatcherGenericBase {
  ErrorKind kind;
  explicit HasKind(ErrorKind k) : kind(k) {}
  bool match(const Error& e) const { return e.kind() == kind; }
  std::string describe() const override { return "has the expected error kind"; }
};

const SubshiftSpec kFull2{2, {{1, 1}, {1, 1}}};

std::string sample(const std::string& name) {
  return std::string(PRESSURELAB_SAMPLES_DIR) + "/" + name;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("pressurelab_io_" + name);
}

/// Runs the CLI binary; returns its exit code and captures the output file.
int run_cli(const std::string& args) {
  std::string cmd = std::string(PRESSURELAB_CLI_PATH) + " " + args + " 2>/dev/null";
  int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("JSON parsing maps malformed input to bad_input") {
  CHECK_THROWS_MATCHES(parse_json("{not json"), Error, HasKind(ErrorKind::bad_input));
  CHECK_THROWS_MATCHES(read_json_file("/nonexistent/path.json"), Error,
                       HasKind(ErrorKind::bad_input));
  CHECK(parse_json("[1, 2]").is_array());
}

TEST_CASE("Complex values accept numbers and [re, im] pairs") {
  CHECK(detail::json_complex(parse_json("0.5"), "x") == cplx(0.5, 0.0));
  CHECK(detail::json_complex(parse_json("[0.5]"), "x") == cplx(0.5, 0.0));
  CHECK(detail::json_complex(parse_json("[0.3, 0.1]"), "x") == cplx(0.3, 0.1));
  CHECK_THROWS_MATCHES(detail::json_complex(parse_json("[1, 2, 3]"), "x"), Error,
                       HasKind(ErrorKind::bad_input));
  CHECK_THROWS_MATCHES(detail::json_complex(parse_json("\"z\""), "x"), Error,
                       HasKind(ErrorKind::bad_input));
}

TEST_CASE("Subshift specs round-trip and are validated") {
  SubshiftSpec spec = subshift_from_json(parse_json(R"({"n": 2, "A": [[1, 1], [1, 0]]})"));
  CHECK(spec.n == 2);
  CHECK(spec.A == std::vector<std::vector<int>>{{1, 1}, {1, 0}});
  CHECK(subshift_from_json(subshift_to_json(spec)).A == spec.A);

  CHECK_THROWS_MATCHES(subshift_from_json(parse_json(R"({"n": 2})")), Error,
                       HasKind(ErrorKind::bad_input));
  CHECK_THROWS_MATCHES(subshift_from_json(parse_json(R"({"n": 2, "A": [[1, 2], [1, 1]]})")),
                       Error, HasKind(ErrorKind::bad_input));
  CHECK_THROWS_MATCHES(subshift_from_json(parse_json(R"({"n": 3, "A": [[1, 1], [1, 1]]})")),
                       Error, HasKind(ErrorKind::bad_input));
}

TEST_CASE("Potential specs cover the tagged union") {
  SftPotential c = potential_from_json(parse_json(R"({"type": "constant", "value": 0.25})"),
                                       kFull2);
  CHECK(cylinder_values(c) == std::vector<double>{0.25, 0.25});

  SftPotential table = potential_from_json(
      parse_json(R"({"type": "cylinder", "depth": 1, "values": [1.5, -0.5]})"), kFull2);
  CHECK(cylinder_values(table) == std::vector<double>{1.5, -0.5});

  SftPotential cob = potential_from_json(
      parse_json(R"({"type": "coboundary", "h": {"type": "cylinder", "depth": 1, "values": [1, 0]}})"),
      kFull2);
  CHECK(cohomology_defect(cob, 6) < 1e-14);

  SftPotential lin = potential_from_json(parse_json(R"({
    "type": "linear",
    "terms": [
      {"weight": 2.0, "potential": {"type": "cylinder", "depth": 1, "values": [1, 0]}},
      {"weight": -1.0, "potential": {"type": "constant", "value": 1.0}}
    ]})"),
                                         kFull2);
  CHECK(cylinder_values(lin) == std::vector<double>{1.0, -1.0});

  // round-trip through the canonical cylinder serialization
  SftPotential again = potential_from_json(potential_to_json(lin), kFull2);
  CHECK(cylinder_values(again) == cylinder_values(lin));

  CHECK_THROWS_MATCHES(potential_from_json(parse_json(R"({"type": "wat"})"), kFull2), Error,
                       HasKind(ErrorKind::bad_input));
  CHECK_THROWS_MATCHES(
      potential_from_json(parse_json(R"({"type": "cylinder", "depth": 1, "values": [1]})"),
                          kFull2),
      Error, HasKind(ErrorKind::bad_input));
}

TEST_CASE("Map specs parse all three kinds") {
  MapSpec poly = map_from_json(parse_json(R"({"type": "poly", "coeffs": [[0.05, 0], 0, 1]})"));
  CHECK(poly.kind == MapSpec::Kind::poly);
  CHECK(poly.coeffs == Poly{cplx(0.05, 0.0), cplx(0.0), cplx(1.0)});

  MapSpec bl = map_from_json(parse_json(R"({"type": "blaschke", "a": [[0.3, 0.1]]})"));
  CHECK(bl.kind == MapSpec::Kind::blaschke);
  CHECK(bl.point.a == std::vector<cplx>{cplx(0.3, 0.1)});
  CHECK(bl.point.b == std::vector<cplx>{cplx(0.3, -0.1)});
  CHECK(bl.point.validated);

  MapSpec qbm = map_from_json(
      parse_json(R"({"type": "qb", "a": [[0.3, 0.1]], "b": [0.2], "validated": true})"));
  CHECK(qbm.kind == MapSpec::Kind::qb);
  CHECK(qbm.point.validated);
  RationalMap f = resolve_map(qbm);
  CHECK(std::abs(map_eval(f, cplx(1.0)) - cplx(1.0)) < 1e-12);  // normal form fixes 1

  CHECK_THROWS_MATCHES(map_from_json(parse_json(R"({"type": "poly", "coeffs": [1, 1]})")),
                       Error, HasKind(ErrorKind::bad_input));
  CHECK_THROWS_MATCHES(map_from_json(parse_json(R"({"type": "blaschke", "a": [[1.2, 0]]})")),
                       Error, HasKind(ErrorKind::bad_input));
  CHECK_THROWS_MATCHES(map_from_json(parse_json(R"({"coeffs": [0, 0, 1]})")), Error,
                       HasKind(ErrorKind::bad_input));
}

TEST_CASE("Path specs parse segments and tangents") {
  PathSpec seg = path_from_json(parse_json(R"({
    "type": "segment",
    "from": {"type": "blaschke", "a": [0.3]},
    "to": {"a": [[0.3, 0.05]], "b": [[0.28, 0]]}})"));
  CHECK(seg.kind == PathSpec::Kind::segment);
  CHECK(seg.from.b == std::vector<cplx>{cplx(0.3, 0.0)});
  MapPath sp = resolve_path(seg);
  CHECK(sp.has_qb);

  PathSpec tan = path_from_json(parse_json(R"({
    "type": "tangent",
    "at": {"type": "blaschke", "a": [0.5]},
    "dir": {"da": [[1, 0]], "db": [[1, 0]]}})"));
  CHECK(tan.kind == PathSpec::Kind::tangent);
  MapPath tp = resolve_path(tan, 0.1);
  QBPoint moved = tp.qb_at(0.05);
  CHECK(moved.a[0] == cplx(0.55, 0.0));
  CHECK(moved.b[0] == cplx(0.55, 0.0));

  CHECK_THROWS_MATCHES(path_from_json(parse_json(R"({
    "type": "segment",
    "from": {"type": "blaschke", "a": [0.3]},
    "to": {"a": [[0.1, 0], [0.2, 0]], "b": [[0.1, 0], [0.2, 0]]}})")),
                       Error, HasKind(ErrorKind::bad_input));
  CHECK_THROWS_MATCHES(path_from_json(parse_json(R"({
    "type": "tangent",
    "at": {"type": "blaschke", "a": [0.5]},
    "dir": {"da": [[1, 0], [0, 0]], "db": [[1, 0], [0, 0]]}})")),
                       Error, HasKind(ErrorKind::bad_input));
}

TEST_CASE("dump_json is deterministic, ordered, and round-trips doubles") {
  Json j;
  j["zeta"] = 0.1 + 0.2;  // not representable exactly; needs all 17 digits
  j["alpha"] = 1.0;
  j["list"] = Json::array({1, 2, 3});
  j["nested"] = Json::array({Json{{"k", 0.3}}});
  j["nonfinite"] = std::nan("");
  std::string text = dump_json(j);

  CHECK(text.find("\r") == std::string::npos);
  CHECK(text.back() == '\n');
  CHECK(text.find("\"zeta\"") < text.find("\"alpha\""));  // insertion order kept
  CHECK(text.find("[1, 2, 3]") != std::string::npos);     // primitive arrays inline
  CHECK(text.find("null") != std::string::npos);          // nan cannot be JSON

  Json back = parse_json(text);
  CHECK(back["zeta"].get<double>() == 0.1 + 0.2);
  CHECK(dump_json(back) == dump_json(parse_json(dump_json(back))));
}

TEST_CASE("format_number prints 17 significant digits") {
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(0.1 + 0.2) == "0.30000000000000004");
  double third = 1.0 / 3.0;
  CHECK(std::stod(format_number(third)) == third);
}

TEST_CASE("CSV writers emit the documented columns") {
  Cycle c;
  c.points = {cplx(1.0, 0.0)};
  c.period = 1;
  c.multiplier = cplx(2.0, 0.5);
  c.repelling = true;
  std::string csv = cycles_csv({c});
  CHECK(csv == "period,re_z0,im_z0,re_lambda,im_lambda,repelling\n1,1,0,2,0.5,1\n");

  CycleDerivative row;
  row.period = 2;
  row.multiplier = cplx(4.0, 0.0);
  row.entry = 0.125;
  CycleDerivative lost = row;
  lost.tracked = false;
  std::string table = scan_csv({row, lost});
  CHECK(table == "period,re_lambda,im_lambda,D_C\n2,4,0,0.125\n");  // untracked row skipped
}

TEST_CASE("Spec dispatch reaches both inventory builders") {
  MapSpec z2 = map_from_json(parse_json(R"({"type": "poly", "coeffs": [0, 0, 1]})"));
  std::vector<Cycle> pc = spec_cycles(z2, 5);
  CHECK(!pc.empty());
  CHECK(spec_dimension(z2, 8).delta == Catch::Approx(1.0).margin(1e-8));

  MapSpec bl = map_from_json(parse_json(R"({"type": "blaschke", "a": [0.3]})"));
  std::vector<Cycle> bc = spec_cycles(bl, 5);
  CHECK(!bc.empty());
  CHECK_THROWS_MATCHES(spec_qb_point(z2), Error, HasKind(ErrorKind::bad_input));
  CHECK(spec_qb_point(bl).a == bl.point.a);
}

TEST_CASE("CLI computes pressure end to end") {
  auto out = temp_file("pressure.json");
  int code = run_cli("pressure --input " + sample("full2_constant.json") + " --output " +
                     out.string());
  REQUIRE(code == 0);
  Json rep = read_json_file(out.string());
  CHECK(rep["command"] == "pressure");
  CHECK(rep["pressure"].get<double>() == Catch::Approx(std::log(2.0)).margin(1e-9));
  CHECK(rep["matrix_pressure"].get<double>() == Catch::Approx(std::log(2.0)).margin(1e-9));
  CHECK(rep["config"]["subshift"]["n"] == 2);
  std::filesystem::remove(out);
}

TEST_CASE("CLI dimension emits a convergence table and the validated result") {
  auto out = temp_file("dimension.json");
  int code = run_cli("dimension --input " + sample("z2.json") + " --period-max 10 --output " +
                     out.string());
  REQUIRE(code == 0);
  Json rep = read_json_file(out.string());
  CHECK(rep["delta"].get<double>() == Catch::Approx(1.0).margin(1e-8));
  CHECK(rep["convergence_table"].size() >= 5);
  CHECK(rep["convergence_table"].back()["delta"].get<double>() == rep["delta"].get<double>());
  std::filesystem::remove(out);
}

TEST_CASE("CLI cycles defaults to CSV") {
  auto out = temp_file("cycles.csv");
  int code = run_cli("cycles --input " + sample("blaschke_03.json") +
                     " --period-max 5 --output " + out.string());
  REQUIRE(code == 0);
  std::string text = read_text_file(out.string());
  CHECK(text.rfind("period,re_z0,im_z0,re_lambda,im_lambda,repelling\n", 0) == 0);
  CHECK(text.find("\r") == std::string::npos);
  std::filesystem::remove(out);
}

TEST_CASE("CLI norm reports the degenerate J-direction") {
  auto out = temp_file("norm.json");
  int code = run_cli("norm --input " + sample("tangent_j_05.json") + " --output " + out.string());
  REQUIRE(code == 0);
  Json rep = read_json_file(out.string());
  CHECK(rep["value"].get<double>() < 1e-5);
  CHECK(rep["denominator"].get<double>() > 0.0);
  std::filesystem::remove(out);
}

TEST_CASE("CLI scan separates the two directions at a Blaschke point") {
  auto out = temp_file("scan.json");
  int code = run_cli("scan --input " + sample("scan_blaschke_05.json") + " --output " +
                     out.string());
  REQUIRE(code == 0);
  Json rep = read_json_file(out.string());
  CHECK(rep["blaschke"] == true);
  CHECK(rep["pass"] == true);
  CHECK(rep["directions"][0]["verdict"] == "NONDEGENERATE");
  CHECK(rep["directions"][1]["verdict"] == "DEGENERATE");
  std::filesystem::remove(out);
}

TEST_CASE("CLI involution and order run on the off-locus sample") {
  auto out = temp_file("involution.json");
  REQUIRE(run_cli("involution --input " + sample("qb_off_locus.json") + " --period-max 5 --output " +
                  out.string()) == 0);
  Json rep = read_json_file(out.string());
  CHECK(rep["max_multiplier_deviation"].get<double>() < 1e-8);
  CHECK(rep["dual_point"]["a"][0][0].get<double>() == Catch::Approx(0.2));

  auto out2 = temp_file("order.json");
  REQUIRE(run_cli("order --input " + sample("qb_off_locus.json") + " --output " + out2.string()) ==
          0);
  Json rep2 = read_json_file(out2.string());
  REQUIRE(rep2["fixed_points"].size() == 1);
  CHECK(rep2["fixed_points"][0][0].get<double>() == Catch::Approx(1.0).margin(1e-9));
  std::filesystem::remove(out);
  std::filesystem::remove(out2);
}

TEST_CASE("CLI maps input mistakes to exit code 1") {
  CHECK(run_cli("dimension --input /nonexistent/input.json") == 1);
  CHECK(run_cli("order --input " + sample("z2.json")) == 1);
  CHECK(run_cli("dimension") == 1);
}

TEST_CASE("CLI reports are byte-identical across runs and worker counts") {
  auto out1 = temp_file("det1.json");
  auto out8 = temp_file("det8.json");
  REQUIRE(run_cli("dimension --input " + sample("z2_plus_005.json") +
                  " --period-max 11 --workers 1 --output " + out1.string()) == 0);
  REQUIRE(run_cli("dimension --input " + sample("z2_plus_005.json") +
                  " --period-max 11 --workers 8 --output " + out8.string()) == 0);
  CHECK(read_text_file(out1.string()) == read_text_file(out8.string()));
  std::filesystem::remove(out1);
  std::filesystem::remove(out8);
}
