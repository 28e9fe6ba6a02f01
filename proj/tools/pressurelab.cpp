// Batch front-end: parses map/path/subshift specs from JSON files, dispatches
// the library computations, and emits machine-readable reports (JSON) or
// plot-ready tables (CSV).  Exit codes: 0 all checks pass, 1 bad input,
// 2 assertion failure (convergence/diagnostic/tracking/domain), 3 the only
// failures were inconclusive verdicts, 4 resource cap exceeded.

#include <cstdint>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "pressurelab/io.hpp"

namespace pl = pressurelab;

namespace {

struct Options {
  std::string input;
  std::string output;
  std::string format;  // "" = per-command default
  int period_max = -1;
  int depth = -1;
  double tol = -1.0;
  double h = 1e-4;
  double t_max = 1.0;
  int grid = -1;
  std::uint64_t seed = 0x70726c6162u;
  int workers = 0;  // <= 0: available parallelism
};

void add_common_flags(CLI::App* cmd, Options& o) {
  cmd->set_help_flag("--help", "print help");  // frees -h / --h for the step flag
  cmd->add_option("--input", o.input, "input spec file (JSON)")->required();
  cmd->add_option("--output", o.output, "output file (default: stdout)");
  cmd->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--period-max", o.period_max, "largest cycle period / orbit level");
  cmd->add_option("--depth", o.depth, "cylinder depth for the transfer matrix");
  cmd->add_option("--tol", o.tol, "tolerance (per-command default)");
  cmd->add_option("--h", o.h, "finite-difference step");
  cmd->add_option("--t-max", o.t_max, "parameter range of tangent paths");
  cmd->add_option("--grid", o.grid, "grid size (scan directions / marking samples)");
  cmd->add_option("--seed", o.seed, "seed for sampled directions");
  cmd->add_option("--workers", o.workers, "worker threads (0 = all cores)")
      ->envname("PRESSURELAB_WORKERS");
}

int resolve(int value, int fallback) { return value >= 0 ? value : fallback; }
double resolve(double value, double fallback) { return value >= 0.0 ? value : fallback; }

std::string resolve_format(const Options& o, const std::string& fallback) {
  return o.format.empty() ? fallback : o.format;
}

void emit(const Options& o, const std::string& text) {
  if (o.output.empty())
    std::cout << text;
  else
    pl::write_text_file(o.output, text);
}

std::string kv_csv(const std::vector<std::pair<std::string, double>>& rows) {
  std::string out = "quantity,value\n";
  for (const auto& [k, v] : rows) out += k + "," + pl::format_number(v) + "\n";
  return out;
}

// --------------------------------------------------------------------------
// pressure: subshift + potential -> orbit and matrix estimates.

int cmd_pressure(const Options& o) {
  pl::Json in = pl::read_json_file(o.input);
  pl::SubshiftSpec spec =
      pl::subshift_from_json(pl::detail::json_field(in, "subshift", "pressure input"));
  pl::SftPotential phi =
      pl::potential_from_json(pl::detail::json_field(in, "potential", "pressure input"), spec);
  int n = resolve(o.period_max, 12);
  int k = resolve(o.depth, phi.depth);

  pl::EquilibriumStats stats = pl::pressure(phi, n, o.workers);
  double matrix = pl::pressure_matrix(phi, k);

  pl::Json rep;
  rep["command"] = "pressure";
  rep["config"]["subshift"] = pl::subshift_to_json(spec);
  rep["config"]["potential"] = pl::potential_to_json(phi);
  rep["config"]["period_max"] = n;
  rep["config"]["depth"] = k;
  rep["config"]["seed"] = o.seed;
  rep["pressure"] = stats.pressure;
  rep["matrix_pressure"] = matrix;
  rep["mean_energy"] = stats.mean_energy;
  rep["entropy"] = stats.entropy;
  rep["estimator"] = stats.estimator;
  rep["convergence_gap"] = stats.convergence_gap;
  rep["convergence_warning"] = stats.convergence_warning;

  if (resolve_format(o, "json") == "csv")
    emit(o, kv_csv({{"pressure", stats.pressure},
                    {"matrix_pressure", matrix},
                    {"mean_energy", stats.mean_energy},
                    {"entropy", stats.entropy},
                    {"convergence_gap", stats.convergence_gap}}));
  else
    emit(o, pl::dump_json(rep));
  return 0;
}

// --------------------------------------------------------------------------
// dimension: map spec -> Hausdorff dimension with a delta-vs-n table.

int cmd_dimension(const Options& o) {
  pl::MapSpec spec = pl::map_from_json(pl::read_json_file(o.input));
  int n_max = resolve(o.period_max, 12);
  std::vector<pl::Cycle> cycles = pl::spec_cycles(spec, n_max, o.workers);

  pl::Json table = pl::Json::array();
  pl::DimensionResult res;
  bool have = false;
  for (int n = 4; n <= n_max; ++n) {
    std::vector<pl::Cycle> upto;
    for (const pl::Cycle& c : cycles)
      if (c.period <= n) upto.push_back(c);
    try {
      pl::DimensionResult r = pl::bowen_dimension(pl::multiplier_table(upto, n));
      pl::Json row;
      row["n"] = n;
      row["delta"] = r.delta;
      table.push_back(std::move(row));
      if (n == n_max) {
        res = r;
        have = true;
      }
    } catch (const pl::Error&) {
      // a truncation too short to bracket the root is skipped, not fatal
      if (n == n_max) throw;
    }
  }
  pl::require(have, pl::ErrorKind::convergence, "dimension: no level converged");
  if (spec.kind != pl::MapSpec::Kind::poly && spec.point.validated)
    pl::require(res.delta >= 1.0 - 1e-9, pl::ErrorKind::diagnostic,
                "hausdorff_dimension: dimension below 1 at a validated point (quasi-circle should "
                "force delta >= 1)");

  pl::Json rep;
  rep["command"] = "dimension";
  rep["config"]["map"] = pl::map_to_json(spec);
  rep["config"]["period_max"] = n_max;
  rep["config"]["seed"] = o.seed;
  rep["delta"] = res.delta;
  rep["bracket_lo"] = res.lo;
  rep["bracket_hi"] = res.hi;
  rep["residual"] = res.residual;
  rep["newton_iters"] = res.newton_iters;
  rep["cycles_used"] = static_cast<int>(cycles.size());
  rep["convergence_table"] = table;

  if (resolve_format(o, "json") == "csv") {
    std::string out = "n,delta\n";
    for (const pl::Json& row : rep["convergence_table"])
      out += std::to_string(row["n"].get<int>()) + "," +
             pl::format_number(row["delta"].get<double>()) + "\n";
    emit(o, out);
  } else {
    emit(o, pl::dump_json(rep));
  }
  return 0;
}

// --------------------------------------------------------------------------
// norm: tangent path spec -> squared pressure semi-norm; a {"paths":[p1,p2]}
// input polarizes the pressure form of the two directions instead.

int cmd_norm(const Options& o) {
  pl::Json in = pl::read_json_file(o.input);
  int level = resolve(o.period_max, 12);
  double rtol = resolve(o.tol, 1e-2);

  pl::Json rep;
  rep["command"] = "norm";
  std::string csv;

  if (in.is_object() && in.contains("paths")) {
    const pl::Json& arr = in["paths"];
    pl::require(arr.is_array() && arr.size() == 2, pl::ErrorKind::bad_input,
                "norm: \"paths\" must hold exactly two tangent paths");
    pl::PathSpec p1 = pl::path_from_json(arr[0]);
    pl::PathSpec p2 = pl::path_from_json(arr[1]);
    pl::require(p1.kind == pl::PathSpec::Kind::tangent && p2.kind == pl::PathSpec::Kind::tangent,
                pl::ErrorKind::bad_input, "norm: both paths must be tangent paths");
    pl::require(p1.at.a == p2.at.a && p1.at.b == p2.at.b, pl::ErrorKind::bad_input,
                "norm: the two tangent paths must share the base point");
    pl::FormResult form = pl::pressure_form(p1.at, p1.dir, p2.dir, level, o.h, o.workers, rtol);
    rep["config"]["paths"] = pl::Json::array({pl::path_to_json(p1), pl::path_to_json(p2)});
    rep["config"]["period_max"] = level;
    rep["config"]["h"] = o.h;
    rep["config"]["tol"] = rtol;
    rep["config"]["seed"] = o.seed;
    rep["value"] = form.value;
    rep["cross_check"] = form.cross_check;
    rep["denominator"] = form.denominator;
    rep["level"] = form.level;
    csv = kv_csv({{"value", form.value},
                  {"cross_check", form.cross_check},
                  {"denominator", form.denominator}});
  } else {
    pl::PathSpec path = pl::path_from_json(in);
    pl::require(path.kind == pl::PathSpec::Kind::tangent, pl::ErrorKind::bad_input,
                "norm: expected a tangent path spec");
    pl::SeminormResult sn = pl::pressure_seminorm(path.at, path.dir, level, o.h, o.workers, rtol);
    rep["config"]["path"] = pl::path_to_json(path);
    rep["config"]["period_max"] = level;
    rep["config"]["h"] = o.h;
    rep["config"]["tol"] = rtol;
    rep["config"]["seed"] = o.seed;
    rep["value"] = sn.value;
    rep["variance"] = sn.variance;
    rep["denominator"] = sn.denominator;
    rep["lyapunov"] = sn.lyapunov;
    rep["delta0"] = sn.delta0;
    rep["d_delta"] = sn.d_delta;
    rep["cross_check"] = sn.cross_check;
    rep["level"] = sn.level;
    rep["level_gap"] = sn.level_gap;
    rep["table"] = pl::derivative_table_to_json(sn.table);
    csv = pl::scan_csv(sn.table);
  }

  if (resolve_format(o, "json") == "csv")
    emit(o, csv);
  else
    emit(o, pl::dump_json(rep));
  return 0;
}

// --------------------------------------------------------------------------
// scan: degeneracy verdicts over a direction grid at a QB point.

std::vector<pl::TangentVector> sampled_directions(const pl::QBPoint& pt, int count,
                                                  std::uint64_t seed) {
  std::size_t m = pt.a.size();
  std::vector<pl::TangentVector> dirs;
  for (std::size_t j = 0; j < m && static_cast<int>(dirs.size()) < count; ++j) {
    for (pl::cplx unit : {pl::cplx(1.0, 0.0), pl::cplx(0.0, 1.0)}) {
      pl::TangentVector va{std::vector<pl::cplx>(m, 0.0), std::vector<pl::cplx>(m, 0.0)};
      va.da[j] = unit;
      dirs.push_back(va);
      pl::TangentVector vb{std::vector<pl::cplx>(m, 0.0), std::vector<pl::cplx>(m, 0.0)};
      vb.db[j] = unit;
      dirs.push_back(vb);
    }
  }
  if (static_cast<int>(dirs.size()) > count) dirs.resize(static_cast<std::size_t>(count));
  pl::SplitMix64 rng(seed);
  auto entry = [&rng]() { return pl::cplx(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0); };
  while (static_cast<int>(dirs.size()) < count) {
    pl::TangentVector v;
    v.da.resize(m);
    v.db.resize(m);
    for (std::size_t j = 0; j < m; ++j) v.da[j] = entry();
    for (std::size_t j = 0; j < m; ++j) v.db[j] = entry();
    dirs.push_back(std::move(v));
  }
  return dirs;
}

int cmd_scan(const Options& o) {
  pl::Json in = pl::read_json_file(o.input);
  pl::MapSpec mspec = pl::map_from_json(pl::detail::json_field(in, "point", "scan input"));
  pl::QBPoint pt = pl::spec_qb_point(mspec);
  if (!pt.validated) {
    pl::ComponentCertificate cert = pl::certify_component(pt);
    pt.validated = cert.status == pl::CertifyStatus::certified;
  }

  int max_period = resolve(o.period_max, 8);
  double tol = resolve(o.tol, 1e-4);
  std::vector<pl::TangentVector> dirs;
  if (in.contains("directions")) {
    const pl::Json& arr = in["directions"];
    pl::require(arr.is_array() && !arr.empty(), pl::ErrorKind::bad_input,
                "scan directions: expected a non-empty array");
    for (const pl::Json& d : arr) dirs.push_back(pl::tangent_from_json(d, "scan direction"));
  } else {
    dirs = sampled_directions(pt, resolve(o.grid, 8), o.seed);
  }

  pl::LocusReport locus = pl::check_degeneracy_locus(pt, dirs, max_period, 10, tol, o.workers);

  pl::Json rep;
  rep["command"] = "scan";
  rep["config"]["point"] = pl::qb_point_to_json(pt);
  pl::Json dj = pl::Json::array();
  for (const pl::TangentVector& d : dirs) dj.push_back(pl::tangent_to_json(d));
  rep["config"]["directions"] = dj;
  rep["config"]["period_max"] = max_period;
  rep["config"]["tol"] = tol;
  rep["config"]["grid"] = static_cast<int>(dirs.size());
  rep["config"]["seed"] = o.seed;
  rep["blaschke"] = locus.blaschke;
  rep["delta"] = locus.delta;
  rep["has_nonreal_repelling"] = locus.has_nonreal_repelling;
  pl::Json dirs_out = pl::Json::array();
  for (const pl::DirectionReport& dr : locus.directions) {
    pl::Json r;
    r["verdict"] = pl::verdict_name(dr.verdict);
    r["max_entry"] = dr.max_entry;
    r["seminorm_sq"] = dr.seminorm_sq;
    r["tangential_norm"] = dr.tangential_norm;
    r["normal_norm"] = dr.normal_norm;
    r["tb_seminorm_sq"] = dr.tb_seminorm_sq;
    r["pure_j"] = dr.pure_j;
    r["zero"] = dr.zero;
    dirs_out.push_back(std::move(r));
  }
  rep["directions"] = dirs_out;
  rep["inconclusive"] = locus.inconclusive;
  rep["pass"] = locus.pass;
  rep["summary"] = locus.summary;

  if (resolve_format(o, "json") == "csv") {
    std::string out = "direction,verdict,max_entry,seminorm_sq\n";
    for (std::size_t i = 0; i < locus.directions.size(); ++i) {
      const pl::DirectionReport& dr = locus.directions[i];
      out += std::to_string(i) + "," + pl::verdict_name(dr.verdict) + "," +
             pl::format_number(dr.max_entry) + "," + pl::format_number(dr.seminorm_sq) + "\n";
    }
    emit(o, out);
  } else {
    emit(o, pl::dump_json(rep));
  }

  if (!locus.pass) return 2;
  if (!locus.inconclusive.empty()) return 3;
  return 0;
}

// --------------------------------------------------------------------------
// cycles: repelling-cycle inventory of a map spec.

int cmd_cycles(const Options& o) {
  pl::MapSpec spec = pl::map_from_json(pl::read_json_file(o.input));
  int n = resolve(o.period_max, 12);
  std::vector<pl::Cycle> cycles = pl::spec_cycles(spec, n, o.workers);

  if (resolve_format(o, "csv") == "json") {
    pl::Json rep;
    rep["command"] = "cycles";
    rep["config"]["map"] = pl::map_to_json(spec);
    rep["config"]["period_max"] = n;
    rep["config"]["seed"] = o.seed;
    rep["cycles"] = pl::cycles_to_json(cycles);
    emit(o, pl::dump_json(rep));
  } else {
    emit(o, pl::cycles_csv(cycles));
  }
  return 0;
}

// --------------------------------------------------------------------------
// order: transported cyclic order of the fixed points (the marking label).

int cmd_order(const Options& o) {
  pl::MapSpec spec = pl::map_from_json(pl::read_json_file(o.input));
  const pl::QBPoint& pt = pl::spec_qb_point(spec);
  int grid = resolve(o.grid, 16);
  pl::MarkingLabel label = pl::transport_marking(pt, grid);

  pl::Json rep;
  rep["command"] = "order";
  rep["config"]["point"] = pl::qb_point_to_json(pt);
  rep["config"]["grid"] = grid;
  rep["config"]["seed"] = o.seed;
  rep["fixed_points"] = pl::complex_list_to_json(label.fixed_points);
  rep["circle_args"] = label.circle_args;

  if (resolve_format(o, "json") == "csv") {
    std::string out = "index,re_fixed,im_fixed,circle_arg\n";
    for (std::size_t i = 0; i < label.fixed_points.size(); ++i)
      out += std::to_string(i) + "," + pl::format_number(label.fixed_points[i].real()) + "," +
             pl::format_number(label.fixed_points[i].imag()) + "," +
             pl::format_number(label.circle_args[i]) + "\n";
    emit(o, out);
  } else {
    emit(o, pl::dump_json(rep));
  }
  return 0;
}

// --------------------------------------------------------------------------
// involution: conjugate-parameter point and the multiplier-conjugation check.

int cmd_involution(const Options& o) {
  pl::MapSpec spec = pl::map_from_json(pl::read_json_file(o.input));
  const pl::QBPoint& pt = pl::spec_qb_point(spec);
  int n = resolve(o.period_max, 6);
  double tol = resolve(o.tol, 1e-8);

  pl::QBPoint dual = pl::involution(pt);
  pl::InvolutionCheck chk = pl::involution_check(pt, n, o.workers);

  pl::Json rep;
  rep["command"] = "involution";
  rep["config"]["point"] = pl::qb_point_to_json(pt);
  rep["config"]["period_max"] = n;
  rep["config"]["tol"] = tol;
  rep["config"]["seed"] = o.seed;
  rep["dual_point"] = pl::qb_point_to_json(dual);
  rep["cycles_checked"] = chk.cycles_checked;
  rep["max_multiplier_deviation"] = chk.max_multiplier_deviation;
  rep["max_residual"] = chk.max_residual;

  if (resolve_format(o, "json") == "csv")
    emit(o, kv_csv({{"cycles_checked", static_cast<double>(chk.cycles_checked)},
                    {"max_multiplier_deviation", chk.max_multiplier_deviation},
                    {"max_residual", chk.max_residual}}));
  else
    emit(o, pl::dump_json(rep));

  pl::require(chk.max_multiplier_deviation <= tol, pl::ErrorKind::diagnostic,
              "involution: corresponding multipliers are not conjugate within tolerance");
  return 0;
}

template <typename F>
int run_guarded(F&& f) {
  try {
    return f();
  } catch (const pl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case pl::ErrorKind::bad_input:
        return 1;
      case pl::ErrorKind::resource:
        return 4;
      default:
        return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thermodynamic-formalism toolkit: pressure, dimension, and the pressure semi-norm"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);

  Options o;
  CLI::App* c_pressure = app.add_subcommand("pressure", "pressure of a potential on a subshift");
  CLI::App* c_dimension = app.add_subcommand("dimension", "Hausdorff dimension of a Julia set");
  CLI::App* c_norm = app.add_subcommand("norm", "pressure semi-norm / form of tangent paths");
  CLI::App* c_scan = app.add_subcommand("scan", "degeneracy verdicts over a direction grid");
  CLI::App* c_cycles = app.add_subcommand("cycles", "repelling-cycle inventory");
  CLI::App* c_order = app.add_subcommand("order", "transported cyclic order of fixed points");
  CLI::App* c_involution = app.add_subcommand("involution", "conjugate-parameter check");
  for (CLI::App* cmd :
       {c_pressure, c_dimension, c_norm, c_scan, c_cycles, c_order, c_involution})
    add_common_flags(cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (o.workers <= 0) {
    unsigned hw = std::thread::hardware_concurrency();
    o.workers = hw == 0 ? 1 : static_cast<int>(hw);
  }

  if (c_pressure->parsed()) return run_guarded([&] { return cmd_pressure(o); });
  if (c_dimension->parsed()) return run_guarded([&] { return cmd_dimension(o); });
  if (c_norm->parsed()) return run_guarded([&] { return cmd_norm(o); });
  if (c_scan->parsed()) return run_guarded([&] { return cmd_scan(o); });
  if (c_cycles->parsed()) return run_guarded([&] { return cmd_cycles(o); });
  if (c_order->parsed()) return run_guarded([&] { return cmd_order(o); });
  if (c_involution->parsed()) return run_guarded([&] { return cmd_involution(o); });
  return 1;
}
