// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "brute_force.hpp"
#include "fdr/cli.hpp"
#include "fdr/dims.hpp"
#include "fdr/report.hpp"

using namespace fdr;
using namespace fdr::testing;

namespace {

const double kLog3Log2 = std::log(3.0) / std::log(2.0);

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

std::string num(double x) { return format_double(x); }

std::vector<RegionOracle> cube_oracles(const FractalStructure& fs) {
  std::vector<RegionOracle> out;
  for (const char* name : {"full", "point", "sierpinski", "cantor4", "diagonal"}) {
    out.push_back(oracles::by_name(name, fs));
  }
  return out;
}

Outcome count_identity() {
  Outcome r;
  for (int d : {2, 3}) {
    auto cf = hilbert_family(d);
    const int top = d == 2 ? 8 : 4;
    cf.extend(top);
    for (const auto& o : cube_oracles(cf.range())) {
      for (int n = 1; n <= top; ++n) {
        const auto cover = digitize(o, cf.range(), n);
        const auto pre = preimage_cover(cf, cover);
        r.require(pre.cells.size() == cover.cells.size(),
                  o.name() + " via hilbert" + std::to_string(d) + " at level " + std::to_string(n));
      }
    }
  }
  if (r.ok) r.detail = "hilbert2 levels 1..8, hilbert3 levels 1..4, 5 sets each";
  return r;
}

Outcome refinement_conditions() {
  Outcome r;
  auto h2 = hilbert_family(2), h3 = hilbert_family(3), g = gasket_family();
  r.require(verify_conditions(h2, 6).passed(), "hilbert2 depth 6");
  r.require(verify_conditions(h3, 4).passed(), "hilbert3 depth 4");
  r.require(verify_conditions(g, 6).passed(), "gasket depth 6");
  auto bad = swap_images(hilbert_family(2), 3, 2, 0, 10);
  const auto rep = verify_conditions(bad, 3);
  r.require(!rep["i"].passed && !rep["i"].witness.empty(), "swapped fixture not rejected by (i)");
  if (r.ok) r.detail = "3 families pass; swapped fixture fails (i) at level " + std::to_string(rep["i"].level);
  return r;
}

Outcome main_hypotheses() {
  Outcome r;
  const auto a = verify_main_hypotheses(hilbert_family(2), 6);
  const auto b = verify_main_hypotheses(hilbert_family(3), 6);
  const auto g = verify_main_hypotheses(gasket_family(), 6);
  r.require(std::abs(a.c - 2.0) < 1e-12 && std::abs(a.exponent - 2.0) < 1e-12 && a.max_residual < 1e-12,
            "hilbert2 c=" + num(a.c) + " d=" + num(a.exponent));
  r.require(std::abs(b.c - std::pow(3.0, 1.5)) < 1e-12 && std::abs(b.exponent - 3.0) < 1e-12 &&
                b.max_residual < 1e-12,
            "hilbert3 c=" + num(b.c) + " d=" + num(b.exponent));
  r.require(std::abs(g.exponent - kLog3Log2) < 1e-9, "gasket d=" + num(g.exponent));
  if (r.ok) r.detail = "hilbert2 (2, 2), hilbert3 (3^1.5, 3), gasket d=" + num(g.exponent);
  return r;
}

Outcome box_type() {
  Outcome r;
  const auto cube2 = FractalStructure::cube(2);
  const auto full = count_series(digitize_tree(oracles::full(cube2), 10));
  const auto sier = count_series(digitize_tree(oracles::sierpinski(2), 10));
  const double f1 = *dim1(full, default_window(10)).value;
  const double s2 = *dim2(sier, {4, 10}).value;
  const double s1 = *dim1(sier, default_window(10)).value;
  r.require(std::abs(f1 - 2.0) <= 1e-6, "full dim1 " + num(f1));
  r.require(std::abs(s2 - kLog3Log2) <= 0.02, "sierpinski dim2 " + num(s2));
  r.require(std::abs(s1 - kLog3Log2) <= 1e-9, "sierpinski dim1 " + num(s1));
  double worst = 0.0;
  const auto h2 = hilbert_family(2);
  for (const char* name : {"full", "sierpinski"}) {
    const auto rep = reduced_dim(oracles::by_name(name, cube2), h2, Estimator::box);
    worst = std::max(worst, rep.reduced->gap);
  }
  const auto g = gasket_family();
  const auto grep = reduced_dim(oracles::by_name("gasket-native", g.range()), g, Estimator::box);
  worst = std::max(worst, grep.reduced->gap);
  r.require(worst < 1e-6, "reduced gap " + num(worst));
  if (r.ok) r.detail = "full dim1 " + num(f1) + ", sierpinski dim2 " + num(s2) + ", max reduced gap " + num(worst);
  return r;
}

Outcome hausdorff_type() {
  Outcome r;
  const auto cube2 = FractalStructure::cube(2);
  const EstimatorOptions opts;
  const double full = *dim4(digitize_tree(oracles::full(cube2), 10), opts).value;
  const double point = *dim4(digitize_tree(oracles::by_name("point", cube2), 10), opts).value;
  ReduceOptions ro;
  ro.depth = 12;
  const auto red = reduced_dim(oracles::sierpinski(2), hilbert_family(2), Estimator::dim4, ro);
  const double product = red.reduced->product;
  r.require(std::abs(full - 2.0) <= 0.05, "full s* " + num(full));
  r.require(point <= opts.tol, "point s* " + num(point));
  r.require(std::abs(product - kLog3Log2) <= 0.1, "sierpinski reduced product " + num(product));
  if (r.ok) r.detail = "full s* " + num(full) + ", point s* " + num(point) + ", sierpinski product " + num(product);
  return r;
}

Outcome dp_exact() {
  Outcome r;
  const int depth = 3;
  std::vector<RegionOracle> sets = cube_oracles(FractalStructure::cube(2));
  const auto gs = FractalStructure::gasket();
  sets.push_back(oracles::full(gs));
  sets.push_back(oracles::by_name("gasket-native", gs));
  double worst = 0.0;
  int checked = 0;
  for (const auto& o : sets) {
    const auto tree = digitize_tree(o, depth);
    for (int n = 0; n <= depth; ++n) {
      const auto covers = all_covers(o, n, depth);
      for (double s : {0.5, 1.0, 1.5, 2.0}) {
        const double dp = h45_profile(tree, s)[n];
        const double brute = cheapest(o.structure(), covers, s);
        const double err = std::abs(dp - brute) / std::max(1.0, std::abs(brute));
        worst = std::max(worst, err);
        ++checked;
        r.require(err <= 1e-12, o.name() + " n=" + std::to_string(n) + " s=" + num(s));
      }
    }
  }
  if (r.ok) r.detail = std::to_string(checked) + " cases, max relative error " + num(worst);
  return r;
}

Outcome sweep_monotone() {
  Outcome r;
  std::vector<double> s;
  for (int i = 0; i <= 30; ++i) s.push_back(0.1 * i);
  const auto cube2 = FractalStructure::cube(2);
  std::vector<RegionOracle> sets = cube_oracles(cube2);
  sets.push_back(oracles::by_name("gasket-native", FractalStructure::gasket()));
  for (const auto& o : sets) {
    const auto tree = digitize_tree(o, 8);
    const auto a = sweep(tree, s, 3), b = sweep(tree, s, 4);
    const auto va = monotonicity_violations(a), vb = monotonicity_violations(b);
    r.require(va.empty(), o.name() + " k=3: " + (va.empty() ? "" : va.front()));
    r.require(vb.empty(), o.name() + " k=4: " + (vb.empty() ? "" : vb.front()));
    r.require(((b.h.array() <= a.h.array() * (1.0 + 1e-12)) || (b.h.array() == 0.0)).all(),
              o.name() + " H4 exceeds H3");
  }
  if (r.ok) r.detail = std::to_string(sets.size()) + " sets, 31 exponents, levels 0..8";
  return r;
}

Outcome structure_constants() {
  Outcome r;
  std::vector<FractalStructure> all;
  for (int d = 1; d <= 3; ++d) {
    all.push_back(FractalStructure::cube(d));
    all.push_back(FractalStructure::dyadic_interval_pow(d));
  }
  all.push_back(FractalStructure::triadic_interval());
  all.push_back(FractalStructure::gasket());
  std::string worst;
  for (const auto& fs : all) {
    const int expect = fs.kind() == StructureKind::cube ? (1 << fs.dim())
                       : fs.kind() == StructureKind::gasket ? 3
                                                            : fs.splitting();
    r.require(fs.splitting() == expect, fs.name() + " splitting");
    for (int n = 0; n <= 4; ++n) {
      const Index cells = fs.cell_count(n);
      for (Index i = 0; i < cells; i += std::max<Index>(1, cells / 97)) {
        r.require(static_cast<int>(fs.children({n, i}).size()) == fs.splitting(), fs.name() + " children count");
      }
    }
    int seen = 0;
    for (int n = 0; n <= 6; ++n) {
      const auto probes = builtin_probe_suite(fs, n, 200, 11);
      const int m = check_kappa(fs, n, probes).max_count;
      seen = std::max(seen, m);
      r.require(m <= fs.kappa(), fs.name() + " level " + std::to_string(n) + " met " + std::to_string(m));
    }
    worst += (worst.empty() ? "" : ", ") + fs.name() + " " + std::to_string(seen) + "/" + std::to_string(fs.kappa());
  }
  if (r.ok) r.detail = "max probe count/kappa: " + worst;
  return r;
}

Outcome quasi_inverse_accuracy() {
  Outcome r;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int d : {2, 3}) {
    const auto cf = hilbert_family(d);
    const double bound = 2.0 * std::ldexp(1.0, -10) * std::sqrt(static_cast<double>(d));
    for (int k = 0; k < 10000; ++k) {
      Point y(d);
      for (int j = 0; j < d; ++j) y[j] = unit(rng);
      const double err = (eval_point(cf, quasi_inverse(cf, y, 10), 10) - y).norm();
      worst = std::max(worst, err / bound);
      r.require(err <= bound, "d=" + std::to_string(d) + " error " + num(err));
    }
  }
  if (r.ok) r.detail = "2 x 10^4 points, worst error / bound " + num(worst);
  return r;
}

std::string run_to_file(std::vector<std::string> args, const std::filesystem::path& out) {
  args.insert(args.begin(), "fdr");
  args.push_back("--out");
  args.push_back(out.string());
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  if (run_cli(static_cast<int>(argv.size()), argv.data(), o, e) != kExitOk) return {};
  std::ifstream in(out, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
  Outcome r;
  const auto dir = std::filesystem::temp_directory_path() / "fdr_acceptance";
  std::filesystem::create_directories(dir);
  const std::vector<std::vector<std::string>> runs{
      {"dims", "--ifs", "gasket", "--samples", "50000", "--seed", "42", "--estimator", "dim4", "--depth", "8"},
      {"reduce", "--set", "sierpinski", "--curve", "hilbert2", "--estimator", "dim4", "--depth", "8"},
      {"verify", "--curve", "gasket", "--depth", "5", "--seed", "42"}};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto a = run_to_file(runs[i], dir / ("a" + std::to_string(i) + ".json"));
    const auto b = run_to_file(runs[i], dir / ("b" + std::to_string(i) + ".json"));
    r.require(!a.empty() && a == b, runs[i][0] + " output differs between runs");
  }
  if (r.ok) r.detail = "dims, reduce and verify outputs byte-identical across two runs";
  return r;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"cover counts preserved by pre-images", count_identity},
      {"refinement conditions verified", refinement_conditions},
      {"diameter power law constants", main_hypotheses},
      {"box type estimators and reduced gap", box_type},
      {"Hausdorff type critical exponents", hausdorff_type},
      {"cover DP matches exhaustive search", dp_exact},
      {"sweep monotonicity and H4 <= H3", sweep_monotone},
      {"splitting counts and kappa bounds", structure_constants},
      {"quasi-inverse accuracy", quasi_inverse_accuracy},
      {"deterministic serialized output", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %zu: %s (%s)\n", o.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.ok) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
