#include "fdr/dims.hpp"

#include <cmath>
#include <future>
#include <numbers>
#include <sstream>

namespace fdr {

namespace {

void check_window(Window w, int depth) {
  if (w.lo < 0 || w.hi > depth) {
    throw LevelError("window [" + std::to_string(w.lo) + ", " + std::to_string(w.hi) + "] outside levels 0.." +
                     std::to_string(depth));
  }
  if (w.hi <= w.lo) throw DegenerateInput("window needs at least two levels");
}

std::vector<LevelRow> rows_of(const CountSeries& series) {
  std::vector<LevelRow> rows;
  for (int n = 0; n <= series.depth(); ++n) rows.push_back({n, series.counts[n], series.diams[n], std::nullopt});
  return rows;
}

DimReport base_report(const CountSeries& series, Estimator e, Window w) {
  DimReport r;
  r.estimator = e;
  r.structure = series.structure.name();
  r.depth = series.depth();
  r.window = w;
  r.levels = rows_of(series);
  return r;
}

void apply_fit(DimReport& r, const LinearFit& fit) {
  r.value = fit.slope;
  r.diagnostics.residual = fit.residual;
  r.diagnostics.slope_stderr = fit.slope_stderr;
  r.diagnostics.ties = fit.ties;
  r.diagnostics.flat_segments = fit.flat_segments;
}

// Slope of log N_n against x(n) over the window.
template <class X>
DimReport count_fit(const CountSeries& series, Estimator e, Window w, X x_of) {
  check_window(w, series.depth());
  DimReport r = base_report(series, e, w);
  if (series.empty()) return r;
  std::vector<double> x, y;
  for (int n = w.lo; n <= w.hi; ++n) {
    x.push_back(x_of(n));
    y.push_back(std::log(static_cast<double>(series.counts[n])));
  }
  apply_fit(r, fit_line(x, y));
  return r;
}

LinearFit growth_fit(const std::vector<double>& profile, Window w) {
  std::vector<double> x, y;
  for (int n = w.lo; n <= w.hi; ++n) {
    if (!(profile[n] > 0.0)) throw DegenerateInput("H vanishes at level " + std::to_string(n));
    x.push_back(n);
    y.push_back(std::log(profile[n]));
  }
  return fit_line(x, y);
}

DimReport critical_report(const CountSeries& series, Estimator e, const HProfile& h,
                          const EstimatorOptions& options) {
  const Window w = options.window.value_or(default_window(series.depth()));
  check_window(w, series.depth());
  DimReport r = base_report(series, e, w);
  const double s_hi = options.s_hi.value_or(series.structure.ambient_dim() + 1.0);
  r.diagnostics.s_lo = options.s_lo;
  r.diagnostics.s_hi = s_hi;
  r.diagnostics.tol = options.tol;
  if (series.empty()) return r;
  const auto crit = critical_exponent(h, w, options.s_lo, s_hi, options.tol, options.slope_threshold);
  apply_fit(r, crit.fit);
  r.value = crit.s;
  r.diagnostics.iterations = crit.iterations;
  for (int n = 0; n <= series.depth(); ++n) r.levels[n].h = crit.profile[n];
  return r;
}

}  // namespace

CountSeries count_series(const CoverTree& tree) {
  CountSeries out{tree.structure(), {}, {}};
  for (int n = 0; n <= tree.depth(); ++n) {
    out.counts.push_back(tree.count(n));
    out.diams.push_back(tree.count(n) > 0 ? tree.structure().diam(n) : 0.0);
  }
  return out;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  const auto m = static_cast<Eigen::Index>(x.size());
  if (m < 2 || y.size() != x.size()) throw DegenerateInput("a line fit needs at least two points");
  Eigen::MatrixXd a(m, 2);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    a(i, 0) = x[i];
    a(i, 1) = 1.0;
    b[i] = y[i];
  }
  const double spread = a.col(0).maxCoeff() - a.col(0).minCoeff();
  if (!(spread > 0.0)) throw DegenerateInput("constant regressor: every x equals " + std::to_string(x[0]));

  LinearFit fit;
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
  fit.slope = coef[0];
  fit.intercept = coef[1];
  const Eigen::VectorXd res = b - a * coef;
  fit.residual = std::sqrt(res.squaredNorm() / static_cast<double>(m));
  if (m > 2) {
    const double sxx = (a.col(0).array() - a.col(0).mean()).square().sum();
    fit.slope_stderr = std::sqrt(res.squaredNorm() / static_cast<double>(m - 2) / sxx);
  }
  std::vector<double> xs(x.begin(), x.end());
  std::sort(xs.begin(), xs.end());
  for (std::size_t i = 1; i < xs.size(); ++i) fit.ties += xs[i] == xs[i - 1] ? 1 : 0;
  for (std::size_t i = 1; i < y.size(); ++i) fit.flat_segments += y[i] == y[i - 1] ? 1 : 0;
  return fit;
}

Estimator parse_estimator(const std::string& name) {
  if (name == "box") return Estimator::box;
  if (name == "dim1") return Estimator::dim1;
  if (name == "dim2") return Estimator::dim2;
  if (name == "dim3") return Estimator::dim3;
  if (name == "dim4" || name == "dim5") return Estimator::dim4;
  throw std::invalid_argument("unknown estimator '" + name + "'");
}

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::box: return "box";
    case Estimator::dim1: return "dim1";
    case Estimator::dim2: return "dim2";
    case Estimator::dim3: return "dim3";
    case Estimator::dim4: return "dim4";
  }
  return "?";
}

int default_depth(const FractalStructure& fs) { return fs.ambient_dim() == 3 ? 6 : 10; }

Window default_window(int depth) { return {3, depth - 1}; }

DimReport dim1(const CountSeries& series, Window window) {
  return count_fit(series, Estimator::dim1, window, [](int n) { return n * std::numbers::ln2; });
}

DimReport dim2(const CountSeries& series, Window window) {
  return count_fit(series, Estimator::dim2, window, [&series](int n) { return -std::log(series.diams[n]); });
}

DimReport box_dim(const CountSeries& series, Window window) {
  return count_fit(series, Estimator::box, window,
                   [&series](int n) { return -std::log(series.structure.diam(n)); });
}

std::vector<double> h3_profile(const CountSeries& series, double s) {
  const int depth = series.depth();
  std::vector<double> out(depth + 1);
  double best = INFINITY;
  for (int l = depth; l >= 0; --l) {
    const double level_sum = static_cast<double>(series.counts[l]) * std::pow(series.structure.diam(l), s);
    best = std::min(best, level_sum);
    out[l] = best;
  }
  return out;
}

double h3(const CountSeries& series, double s, int n) {
  if (n < 0 || n > series.depth()) throw LevelError("h3 level " + std::to_string(n) + " outside the series");
  return h3_profile(series, s)[n];
}

std::vector<double> h45_profile(const CoverTree& tree, double s) {
  const int depth = tree.depth();
  const auto& fs = tree.structure();
  std::vector<std::vector<double>> cost(depth + 1);
  cost[depth].assign(tree.count(depth), std::pow(fs.diam(depth), s));
  for (int n = depth - 1; n >= 0; --n) {
    const double own = std::pow(fs.diam(n), s);
    const auto offsets = tree.offsets(n);
    cost[n].resize(tree.count(n));
    for (std::size_t i = 0; i < cost[n].size(); ++i) {
      double kids = 0.0;
      for (std::size_t j = offsets[i]; j < offsets[i + 1]; ++j) kids += cost[n + 1][j];
      cost[n][i] = std::min(own, kids);
    }
  }
  // H_m: level-m costs summed subtree by subtree up to the root.
  std::vector<double> out(depth + 1, 0.0);
  for (int m = 0; m <= depth; ++m) {
    std::vector<double> t = cost[m];
    for (int l = m - 1; l >= 0; --l) {
      const auto offsets = tree.offsets(l);
      std::vector<double> up(tree.count(l), 0.0);
      for (std::size_t i = 0; i < up.size(); ++i) {
        for (std::size_t j = offsets[i]; j < offsets[i + 1]; ++j) up[i] += t[j];
      }
      t = std::move(up);
    }
    for (double v : t) out[m] += v;
  }
  return out;
}

double h45_dp(const RegionOracle& oracle, double s, int n, int depth) {
  if (n < 0 || n > depth) throw LevelError("h45 level " + std::to_string(n) + " outside 0.." + std::to_string(depth));
  return h45_profile(digitize_tree(oracle, depth), s)[n];
}

CriticalExponent critical_exponent(const HProfile& h, Window window, double s_lo, double s_hi, double tol,
                                   double slope_threshold) {
  if (!(s_lo < s_hi) || !(tol > 0.0)) throw DegenerateInput("s bracket must be increasing with a positive tolerance");
  auto eval = [&](double s) {
    CriticalExponent c;
    c.s = s;
    c.profile = h(s);
    check_window(window, static_cast<int>(c.profile.size()) - 1);
    c.fit = growth_fit(c.profile, window);
    return c;
  };
  auto growing = [&](const CriticalExponent& c) { return c.fit.slope > slope_threshold; };

  CriticalExponent lo = eval(s_lo);
  if (!growing(lo)) {
    if (s_lo == 0.0) return lo;
    throw DegenerateInput("H is not growing in n at the lower end of the s bracket");
  }
  if (growing(eval(s_hi))) throw DegenerateInput("H is still growing in n at the upper end of the s bracket");
  int iterations = 0;
  while (s_hi - s_lo > tol) {
    const double mid = 0.5 * (s_lo + s_hi);
    if (growing(eval(mid))) {
      s_lo = mid;
    } else {
      s_hi = mid;
    }
    ++iterations;
  }
  CriticalExponent out = eval(0.5 * (s_lo + s_hi));
  out.iterations = iterations;
  return out;
}

DimReport dim3(const CountSeries& series, const EstimatorOptions& options) {
  return critical_report(series, Estimator::dim3, [&series](double s) { return h3_profile(series, s); }, options);
}

DimReport dim4(const CoverTree& tree, const EstimatorOptions& options) {
  return critical_report(count_series(tree), Estimator::dim4,
                         [&tree](double s) { return h45_profile(tree, s); }, options);
}

DimReport estimate(const CoverTree& tree, Estimator estimator, const EstimatorOptions& options) {
  const CountSeries series = count_series(tree);
  const Window w = options.window.value_or(default_window(tree.depth()));
  DimReport r;
  switch (estimator) {
    case Estimator::box: r = box_dim(series, w); break;
    case Estimator::dim1: r = dim1(series, w); break;
    case Estimator::dim2: r = dim2(series, w); break;
    case Estimator::dim3: r = dim3(series, options); break;
    case Estimator::dim4: r = dim4(tree, options); break;
  }
  r.set = tree.source();
  return r;
}

DimReport reduced_dim(const RegionOracle& oracle, const CurveFamily& cf, Estimator estimator,
                      const ReduceOptions& options) {
  if (!(oracle.structure() == cf.range())) {
    throw StructureMismatch("set " + oracle.name() + " lives on " + oracle.structure().name() + " but curve " +
                            cf.name() + " maps onto " + cf.range().name());
  }
  const int depth = options.depth.value_or(default_depth(cf.range()));
  const RegionOracle pulled = transported(cf, oracle);

  std::optional<CoverTree> direct_tree, domain_tree;
  if (options.parallel) {
    auto direct = std::async(std::launch::async, [&] { return digitize_tree(oracle, depth); });
    domain_tree.emplace(digitize_tree(pulled, depth));
    direct_tree.emplace(direct.get());
  } else {
    direct_tree.emplace(digitize_tree(oracle, depth));
    domain_tree.emplace(digitize_tree(pulled, depth));
  }

  DimReport direct = estimate(*direct_tree, estimator, options.estimator);
  if (!direct.value) return direct;
  const DimReport domain = estimate(*domain_tree, estimator, options.estimator);

  ReducedPart part;
  part.curve = cf.name();
  part.direct_value = *direct.value;
  part.domain_value = *domain.value;
  part.exponent_d = cf.exponent();
  part.product = (estimator == Estimator::dim1 ? 1.0 : part.exponent_d) * part.domain_value;
  part.gap = std::abs(part.direct_value - part.product);
  direct.reduced = part;
  return direct;
}

SweepResult sweep(const CoverTree& tree, std::vector<double> s, int k) {
  if (k < 3 || k > 5) throw std::invalid_argument("sweep k must be 3, 4 or 5");
  SweepResult out;
  out.k = k;
  out.depth = tree.depth();
  out.s = std::move(s);
  for (int n = 0; n <= tree.depth(); ++n) out.diams.push_back(tree.structure().diam(n));
  out.h.resize(static_cast<Eigen::Index>(out.s.size()), tree.depth() + 1);
  const CountSeries series = count_series(tree);
  for (std::size_t i = 0; i < out.s.size(); ++i) {
    const auto row = k == 3 ? h3_profile(series, out.s[i]) : h45_profile(tree, out.s[i]);
    for (int n = 0; n <= tree.depth(); ++n) out.h(static_cast<Eigen::Index>(i), n) = row[n];
  }
  return out;
}

std::vector<std::string> monotonicity_violations(const SweepResult& sweep) {
  std::vector<std::string> out;
  const auto rows = sweep.h.rows(), cols = sweep.h.cols();
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index n = 0; n + 1 < cols; ++n) {
      if (sweep.h(i, n + 1) < sweep.h(i, n)) {
        std::ostringstream msg;
        msg << "s=" << sweep.s[i] << ": H decreases from level " << n << " to " << n + 1;
        out.push_back(msg.str());
      }
    }
  }
  for (Eigen::Index i = 0; i + 1 < rows; ++i) {
    if (!(sweep.s[i] < sweep.s[i + 1])) continue;
    for (Eigen::Index n = 0; n < cols; ++n) {
      if (sweep.diams[n] <= 1.0 && sweep.h(i + 1, n) > sweep.h(i, n)) {
        std::ostringstream msg;
        msg << "level " << n << ": H increases from s=" << sweep.s[i] << " to s=" << sweep.s[i + 1];
        out.push_back(msg.str());
      }
    }
  }
  return out;
}

}  // namespace fdr
