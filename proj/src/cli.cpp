#include "fdr/cli.hpp"

#include "CLI11.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fdr/report.hpp"

namespace fdr {

namespace {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Runs f, rewording config-level failures to name the offending flag.
template <class F>
auto field(const std::string& flag, F f) -> decltype(f()) {
  try {
    return f();
  } catch (const CapacityError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(flag + ": " + e.what());
  }
}

FractalStructure parse_structure(const std::string& name) {
  auto dim_suffix = [&](const std::string& prefix) {
    const std::string rest = name.substr(prefix.size());
    int d = 0;
    const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), d);
    if (rest.empty() || ec != std::errc() || ptr != rest.data() + rest.size() || d < 1 || d > kMaxDim) {
      throw std::invalid_argument("bad dimension in structure '" + name + "'");
    }
    return d;
  };
  if (name == "triadic") return FractalStructure::triadic_interval();
  if (name == "gasket") return FractalStructure::gasket();
  if (name.starts_with("cube")) return FractalStructure::cube(dim_suffix("cube"));
  if (name.starts_with("dyadic")) return FractalStructure::dyadic_interval_pow(dim_suffix("dyadic"));
  throw std::invalid_argument("unknown structure '" + name + "' (cubeD, dyadicD, triadic, gasket)");
}

CurveFamily parse_curve(const std::string& name) {
  if (name == "gasket") return gasket_family();
  if (name.starts_with("hilbert")) {
    const std::string rest = name.substr(7);
    int d = 0;
    const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), d);
    if (!rest.empty() && ec == std::errc() && ptr == rest.data() + rest.size() && d >= 2 && d <= kMaxDim) {
      return hilbert_family(d);
    }
  }
  throw std::invalid_argument("unknown curve family '" + name + "' (hilbertD, gasket)");
}

Window parse_window(const std::string& text) {
  const auto colon = text.find(':');
  Window w;
  if (colon == std::string::npos ||
      std::from_chars(text.data(), text.data() + colon, w.lo).ec != std::errc() ||
      std::from_chars(text.data() + colon + 1, text.data() + text.size(), w.hi).ec != std::errc()) {
    throw std::invalid_argument("expected LO:HI, got '" + text + "'");
  }
  return w;
}

void write_atomically(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write " + tmp);
    f << content;
    if (!f.flush()) throw ConfigError("cannot write " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw ConfigError("cannot rename " + tmp + " to " + path + ": " + ec.message());
  }
}

// Writes to path, or to `out` when path is empty.
void emit(std::ostream& out, const std::string& path, const std::string& content) {
  if (path.empty()) {
    out << content;
  } else {
    write_atomically(path, content);
  }
}

struct SetOptions {
  std::string set;
  std::string points;
  std::string ifs;
  std::string ifs_mode = "subset";
  std::uint64_t samples = 200000;
};

struct EstimateOptions {
  std::string estimator = "box";
  int depth = 0;
  std::string window;
  double s_lo = 0.0;
  double s_hi = -1.0;
  double tol = 1e-4;
  std::uint64_t seed = 1;
  std::string out;
  std::string csv;
  std::string sweep_csv;
  double s_step = 0.1;
};

void add_set_options(CLI::App* cmd, SetOptions& s) {
  cmd->add_option("--set", s.set, "builtin set: full, point, sierpinski, cantor4, diagonal, gasket-native");
  cmd->add_option("--points", s.points, "CSV of points in [0,1]^d");
  cmd->add_option("--ifs", s.ifs, "IFS attractor: gasket, square");
  cmd->add_option("--ifs-mode", s.ifs_mode, "subset (chaos game) or superset (piece bounding boxes)");
  cmd->add_option("--samples", s.samples, "chaos-game iterations");
}

void add_estimate_options(CLI::App* cmd, EstimateOptions& e) {
  cmd->add_option("--estimator", e.estimator, "box, dim1, dim2, dim3, dim4 (dim5 = dim4)");
  cmd->add_option("--depth", e.depth, "truncation level L")->envname("FDR_DEPTH");
  cmd->add_option("--window", e.window, "fit window LO:HI (default 3:L-1)");
  cmd->add_option("--s-lo", e.s_lo, "lower end of the s bracket");
  cmd->add_option("--s-hi", e.s_hi, "upper end of the s bracket (default ambient dim + 1)");
  cmd->add_option("--tol", e.tol, "bisection tolerance");
  cmd->add_option("--seed", e.seed, "random seed");
  cmd->add_option("--out", e.out, "JSON report path (default stdout)");
  cmd->add_option("--csv", e.csv, "per-level CSV path");
  cmd->add_option("--sweep-csv", e.sweep_csv, "s,n,H grid CSV path");
  cmd->add_option("--s-step", e.s_step, "s spacing of the sweep grid");
}

int resolve_depth(const EstimateOptions& e, const FractalStructure& fs) {
  const int depth = e.depth > 0 ? e.depth : default_depth(fs);
  if (depth > fs.max_level()) {
    throw CapacityError("--depth: level " + std::to_string(depth) + " exceeds the address width of " + fs.name() +
                        " (max " + std::to_string(fs.max_level()) + ")");
  }
  if (depth < 2) throw ConfigError("--depth: needs at least 2 levels");
  return depth;
}

Ifs ifs_of(const SetOptions& s, const FractalStructure& fs) {
  if (fs.kind() != StructureKind::cube || fs.dim() != 2) throw StructureMismatch("IFS sets live on cube2");
  if (s.ifs == "gasket") return gasket_ifs();
  if (s.ifs == "square") return square_ifs();
  throw std::invalid_argument("unknown IFS '" + s.ifs + "' (gasket, square)");
}

EstimatorOptions resolve_estimator(const EstimateOptions& e, int depth) {
  EstimatorOptions opt;
  if (!e.window.empty()) {
    const Window w = field("--window", [&] { return parse_window(e.window); });
    if (w.lo < 1 || w.hi > depth || w.hi <= w.lo) {
      throw ConfigError("--window: " + e.window + " must satisfy 1 <= LO < HI <= depth " + std::to_string(depth));
    }
    opt.window = w;
  } else if (depth < 5) {
    opt.window = Window{1, depth};
  }
  opt.s_lo = e.s_lo;
  if (e.s_hi >= 0.0) opt.s_hi = e.s_hi;
  if (!(e.tol > 0.0)) throw ConfigError("--tol: must be positive");
  opt.tol = e.tol;
  return opt;
}

// The set as an oracle on fs. IFS supersets have none and come back empty.
std::optional<RegionOracle> make_oracle(const SetOptions& s, const FractalStructure& fs, std::uint64_t seed) {
  const int given = !s.set.empty() + !s.points.empty() + !s.ifs.empty();
  if (given != 1) throw ConfigError("--set: give exactly one of --set, --points, --ifs");
  if (!s.set.empty()) return field("--set", [&] { return oracles::by_name(s.set, fs); });
  if (!s.points.empty()) {
    return field("--points", [&] {
      if (fs.kind() != StructureKind::cube) throw StructureMismatch("point clouds need a cube structure");
      std::ifstream in(s.points);
      if (!in) throw std::invalid_argument("cannot open " + s.points);
      return oracles::point_cloud(fs.dim(), read_point_csv(in, fs.dim()));
    });
  }
  if (s.ifs_mode == "superset") return std::nullopt;
  if (s.ifs_mode != "subset") throw ConfigError("--ifs-mode: expected subset or superset, got '" + s.ifs_mode + "'");
  return field("--ifs", [&] {
    const auto cloud = oracles::point_cloud(fs.dim(), chaos_game(ifs_of(s, fs), s.samples, seed));
    return RegionOracle("ifs-" + s.ifs, fs, [cloud](Cell c) { return cloud.intersects(c); }, false);
  });
}

std::string set_name(const SetOptions& s) {
  if (!s.set.empty()) return s.set;
  if (!s.points.empty()) return "points:" + s.points;
  return "ifs-" + s.ifs + "-" + s.ifs_mode;
}

std::vector<double> s_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi > lo)) throw ConfigError("--s-step: needs a positive step and s-lo < s-hi");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

void write_report(std::ostream& out, const EstimateOptions& e, Json j, const DimReport& report) {
  emit(out, e.out, j.dump(2) + "\n");
  if (!e.csv.empty()) write_atomically(e.csv, series_csv(report));
  if (!e.out.empty()) {
    out << to_string(report.estimator) << " = "
        << (report.value ? format_double(*report.value) : std::string("undefined")) << "\n";
  }
}

Json config_json(const std::string& command, const SetOptions& s, const EstimateOptions& e, int depth) {
  return Json{{"command", command}, {"set", set_name(s)}, {"estimator", e.estimator}, {"depth", depth},
              {"seed", e.seed}};
}

int cmd_dims(const SetOptions& s, const EstimateOptions& e, const std::string& structure, std::ostream& out) {
  const auto fs = field("--structure", [&] { return parse_structure(structure); });
  const Estimator est = field("--estimator", [&] { return parse_estimator(e.estimator); });
  const int depth = resolve_depth(e, fs);
  const EstimatorOptions opt = resolve_estimator(e, depth);
  const auto oracle = make_oracle(s, fs, e.seed);

  DimReport report;
  std::optional<SweepResult> grid;
  if (oracle) {
    const CoverTree tree = digitize_tree(*oracle, depth);
    report = estimate(tree, est, opt);
    if (!e.sweep_csv.empty()) {
      const double hi = opt.s_hi.value_or(fs.ambient_dim() + 1.0);
      grid = sweep(tree, s_grid(opt.s_lo, hi, e.s_step), est == Estimator::dim3 ? 3 : 4);
    }
  } else {
    if (est == Estimator::dim4) throw ConfigError("--estimator: IFS supersets support box, dim1, dim2, dim3");
    if (!e.sweep_csv.empty()) throw ConfigError("--sweep-csv: not available for IFS supersets");
    const Ifs ifs = field("--ifs", [&] { return ifs_of(s, fs); });
    CountSeries series{fs, {}, {}};
    for (int n = 0; n <= depth; ++n) {
      series.counts.push_back(ifs_cover(ifs, fs, n).count());
      series.diams.push_back(fs.diam(n));
    }
    const Window w = opt.window.value_or(default_window(depth));
    switch (est) {
      case Estimator::box: report = box_dim(series, w); break;
      case Estimator::dim1: report = dim1(series, w); break;
      case Estimator::dim2: report = dim2(series, w); break;
      default: report = dim3(series, opt); break;
    }
  }
  report.set = set_name(s);
  Json j = to_json(report);
  j["config"] = config_json("dims", s, e, depth);
  write_report(out, e, std::move(j), report);
  if (grid) write_atomically(e.sweep_csv, sweep_csv(*grid));
  return kExitOk;
}

int cmd_reduce(const SetOptions& s, const EstimateOptions& e, const std::string& curve, double bound, int threads,
               std::ostream& out, std::ostream& err) {
  const CurveFamily cf = field("--curve", [&] { return parse_curve(curve); });
  const Estimator est = field("--estimator", [&] { return parse_estimator(e.estimator); });
  const int depth = resolve_depth(e, cf.range());
  ReduceOptions opt;
  opt.depth = depth;
  opt.estimator = resolve_estimator(e, depth);
  opt.parallel = threads > 1;
  const auto oracle = make_oracle(s, cf.range(), e.seed);
  if (!oracle) throw ConfigError("--ifs-mode: the reduced pipeline needs an oracle; use subset");

  DimReport report = reduced_dim(*oracle, cf, est, opt);
  report.set = set_name(s);
  Json j = to_json(report);
  j["config"] = config_json("reduce", s, e, depth);
  j["config"]["curve"] = cf.name();
  write_report(out, e, std::move(j), report);
  if (bound >= 0.0) {
    if (!report.reduced) {
      err << "assert: the set is empty, no gap to check\n";
      return kExitCheckFailed;
    }
    if (!(report.reduced->gap <= bound)) {
      err << "assert: gap " << format_double(report.reduced->gap) << " exceeds " << format_double(bound) << "\n";
      return kExitCheckFailed;
    }
  }
  return kExitOk;
}

int expected_children(const FractalStructure& fs) {
  switch (fs.kind()) {
    case StructureKind::cube:
    case StructureKind::dyadic_interval_pow: return 1 << fs.dim();
    default: return 3;
  }
}

// Children of every cell of levels < depth are distinct, count as expected
// and point back to their parent.
Json splitting_json(const FractalStructure& fs, int depth) {
  bool ok = true;
  for (int n = 0; n < depth && ok; ++n) {
    for (Cell c : fs.level_cells(n)) {
      auto kids = fs.children(c);
      std::sort(kids.begin(), kids.end());
      ok = ok && static_cast<int>(kids.size()) == expected_children(fs) &&
           std::adjacent_find(kids.begin(), kids.end()) == kids.end();
      for (Cell k : kids) ok = ok && fs.parent(k) == c;
      if (!ok) break;
    }
  }
  return Json{{"structure", fs.name()},
              {"levels_checked", depth},
              {"children", fs.splitting()},
              {"expected", expected_children(fs)},
              {"passed", ok}};
}

Json kappa_json(const FractalStructure& fs, int depth, int probes, std::uint64_t seed, bool& passed) {
  Json levels = Json::array();
  for (int n = 1; n <= depth; ++n) {
    const auto report = check_kappa(fs, n, builtin_probe_suite(fs, n, probes, seed + n));
    const bool ok = report.max_count <= fs.kappa();
    passed = passed && ok;
    levels.push_back(Json{{"n", n}, {"max_count", report.max_count}, {"passed", ok}});
  }
  return Json{{"structure", fs.name()},
              {"kappa", fs.kappa()},
              {"empirical", fs.kappa_is_empirical()},
              {"levels", std::move(levels)}};
}

struct VerifyOptions {
  std::string curve;
  int depth = 6;
  std::string corrupt;
  int kappa_depth = -1;
  int probes = 200;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_verify(const VerifyOptions& v, std::ostream& out, std::ostream& err) {
  CurveFamily cf = field("--curve", [&] { return parse_curve(v.curve); });
  if (v.depth < 2) throw ConfigError("--depth: needs at least 2 levels");
  cf.range().cell_count(v.depth);
  cf.domain().cell_count(v.depth);
  if (!v.corrupt.empty()) {
    cf = field("--corrupt-swap", [&] {
      std::vector<std::string> parts;
      std::stringstream in(v.corrupt);
      for (std::string p; std::getline(in, p, ':');) parts.push_back(p);
      if (parts.size() != 3) throw std::invalid_argument("expected LEVEL:A:B");
      const int level = std::stoi(parts[0]);
      return swap_images(cf, v.depth, level, std::stoull(parts[1]), std::stoull(parts[2]));
    });
  }

  const VerificationReport conditions = verify_conditions(cf, v.depth);
  const MainHypothesesFit fit = verify_main_hypotheses(cf, v.depth);
  const bool fit_ok = fit.max_residual < 1e-9 && std::abs(fit.exponent - cf.exponent()) < 1e-9 &&
                      std::abs(fit.c - cf.constants().c) <= 1e-9 * cf.constants().c;
  const int kdepth = v.kappa_depth >= 0 ? v.kappa_depth : std::min(v.depth, 6);
  bool kappa_ok = true;
  Json kappa = Json::array({kappa_json(cf.range(), kdepth, v.probes, v.seed, kappa_ok),
                            kappa_json(cf.domain(), kdepth, v.probes, v.seed, kappa_ok)});
  const int split_depth = std::min(v.depth, 5);
  Json splitting = Json::array({splitting_json(cf.range(), split_depth), splitting_json(cf.domain(), split_depth)});
  const bool split_ok = splitting[0]["passed"].get<bool>() && splitting[1]["passed"].get<bool>();

  Json j;
  j["curve"] = cf.name();
  j["depth"] = v.depth;
  j["passed"] = conditions.passed() && fit_ok && kappa_ok && split_ok;
  j["conditions"] = to_json(conditions, cf.domain(), cf.range())["conditions"];
  Json mh = to_json(fit);
  mh["expected_c"] = cf.constants().c;
  mh["expected_exponent"] = cf.exponent();
  mh["passed"] = fit_ok;
  j["main_hypotheses"] = std::move(mh);
  j["kappa"] = std::move(kappa);
  j["splitting"] = std::move(splitting);
  j["config"] = Json{{"command", "verify"}, {"seed", v.seed}, {"probes", v.probes}, {"kappa_depth", kdepth}};
  emit(out, v.out, j.dump(2) + "\n");

  for (const auto& c : conditions.conditions) {
    if (c.passed) continue;
    err << "condition (" << c.condition << ") fails at level " << c.level << ": " << c.detail << "\n  witness:";
    for (Cell w : c.witness) err << " (" << w.level << ", " << w.index << ")";
    err << "\n";
  }
  if (!fit_ok) err << "main hypotheses: fitted constants do not match the family\n";
  if (!kappa_ok) err << "kappa: a probe met more cells than the structure's kappa\n";
  if (!split_ok) err << "splitting: unexpected children count\n";
  return j["passed"].get<bool>() ? kExitOk : kExitCheckFailed;
}

int cmd_curve(const std::string& family, int level, const std::string& path, std::ostream& out) {
  const CurveFamily cf = field("--family", [&] { return parse_curve(family); });
  if (level < 0) throw ConfigError("--level: must be >= 0");
  cf.range().cell_count(level);
  cf.domain().cell_count(level);
  emit(out, path, polyline_csv(curve_polyline(cf, level)));
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app("Fractal dimensions of digitized sets and their reduction through space-filling curves", "fdr");
  app.require_subcommand(1);

  SetOptions set_opts;
  EstimateOptions est_opts;
  std::string structure = "cube2";
  auto* dims = app.add_subcommand("dims", "estimate a dimension of a set");
  add_set_options(dims, set_opts);
  add_estimate_options(dims, est_opts);
  dims->add_option("--structure", structure, "cubeD, dyadicD, triadic, gasket");

  std::string curve = "hilbert2";
  double bound = -1.0;
  int threads = 1;
  auto* reduce = app.add_subcommand("reduce", "compare a dimension with d times the dimension of the preimage");
  add_set_options(reduce, set_opts);
  add_estimate_options(reduce, est_opts);
  reduce->add_option("--curve", curve, "hilbertD or gasket");
  reduce->add_option("--assert", bound, "exit 1 when the gap exceeds this bound");
  reduce->add_option("--threads", threads, "digitize both sides concurrently when > 1")->envname("FDR_THREADS");

  VerifyOptions verify_opts;
  auto* verify = app.add_subcommand("verify", "check the refinement conditions and structure constants");
  verify->add_option("--curve", verify_opts.curve, "hilbertD or gasket")->required();
  verify->add_option("--depth", verify_opts.depth, "deepest level checked")->envname("FDR_DEPTH");
  verify->add_option("--corrupt-swap", verify_opts.corrupt, "swap two images LEVEL:A:B before checking");
  verify->add_option("--kappa-depth", verify_opts.kappa_depth, "deepest level probed (default min(depth, 6))");
  verify->add_option("--probes", verify_opts.probes, "random probes per level");
  verify->add_option("--seed", verify_opts.seed, "random seed");
  verify->add_option("--out", verify_opts.out, "JSON report path (default stdout)");

  std::string family;
  int level = 1;
  std::string curve_out;
  auto* curve_cmd = app.add_subcommand("curve", "emit the level-n polyline of image-cell centres");
  curve_cmd->add_option("--family", family, "hilbertD or gasket")->required();
  curve_cmd->add_option("--level", level, "level n");
  curve_cmd->add_option("--out", curve_out, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (dims->parsed()) return cmd_dims(set_opts, est_opts, structure, out);
    if (reduce->parsed()) return cmd_reduce(set_opts, est_opts, curve, bound, threads, out, err);
    if (verify->parsed()) return cmd_verify(verify_opts, out, err);
    return cmd_curve(family, level, curve_out, out);
  } catch (const CapacityError& e) {
    err << "capacity error: " << e.what() << "\n";
    return kExitCapacity;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace fdr
