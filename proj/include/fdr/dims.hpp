#pragma once

// Finite-depth estimators for the box type dimensions (box, I, II, III) and
// the Hausdorff type exponent (IV, V) of a digitized set, and the reduced
// pipeline dim(F) = d * dim(alpha^{-1}(F)).

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fdr/curve.hpp"
#include "fdr/sets.hpp"

namespace fdr {

/// Inclusive range of levels used by a fit.
struct Window {
  int lo = 0;
  int hi = 0;

  bool operator==(const Window&) const = default;
};

/// N_n and diam(F, Gamma_n) for levels 0..depth.
struct CountSeries {
  FractalStructure structure;
  std::vector<Index> counts;
  std::vector<double> diams;  // 0 where the cover is empty

  int depth() const { return static_cast<int>(counts.size()) - 1; }
  bool empty() const { return counts.empty() || counts.front() == 0; }
};

CountSeries count_series(const CoverTree& tree);

/// Unweighted least squares y = slope * x + intercept.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;      // root mean square
  double slope_stderr = 0.0;  // 0 for two points
  int ties = 0;               // repeated x values
  int flat_segments = 0;      // consecutive equal y values
};

/// Throws DegenerateInput for fewer than two points or constant x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

enum class Estimator { box, dim1, dim2, dim3, dim4 };

/// "box", "dim1" .. "dim4"; "dim5" is accepted for dim4.
Estimator parse_estimator(const std::string& name);
std::string to_string(Estimator e);

/// L = 10, or 6 when the carrier is 3-dimensional.
int default_depth(const FractalStructure& fs);
/// [3, depth - 1].
Window default_window(int depth);

struct EstimatorOptions {
  std::optional<Window> window;  // default_window(depth) when unset
  double s_lo = 0.0;
  std::optional<double> s_hi;    // ambient dimension + 1 when unset
  double tol = 1e-4;             // final bracket width of the bisection
  double slope_threshold = 1e-9; // growth slopes at or below count as flat
};

struct LevelRow {
  int n = 0;
  Index count = 0;
  double diam = 0.0;
  std::optional<double> h;  // H^{s*}_n for the critical-exponent estimators
};

struct Diagnostics {
  double residual = 0.0;
  double slope_stderr = 0.0;
  int ties = 0;
  int flat_segments = 0;
  // Critical-exponent estimators only.
  std::optional<double> s_lo, s_hi, tol;
  int iterations = 0;
};

struct ReducedPart {
  std::string curve;
  double direct_value = 0.0;
  double domain_value = 0.0;
  double exponent_d = 0.0;
  double product = 0.0;
  double gap = 0.0;
};

struct DimReport {
  Estimator estimator = Estimator::box;
  std::string set;
  std::string structure;
  int depth = 0;
  std::optional<double> value;  // unset when F is empty
  Window window;
  std::vector<LevelRow> levels;
  Diagnostics diagnostics;
  std::optional<ReducedPart> reduced;

  /// "ok", or "undefined" for an empty set.
  std::string verdict() const { return value ? "ok" : "undefined"; }
};

/// Slope of log N_n against n log 2.
DimReport dim1(const CountSeries& series, Window window);
/// Slope of log N_n against -log diam(F, Gamma_n).
DimReport dim2(const CountSeries& series, Window window);
/// Slope of log N_n against -log of the level mesh diameter.
DimReport box_dim(const CountSeries& series, Window window);

/// min over l in [n, depth] of N_l diam_l^s.
double h3(const CountSeries& series, double s, int n);
std::vector<double> h3_profile(const CountSeries& series, double s);

/// Minimum of sum diam(A)^s over covers of the digitized set by cells of
/// levels n..depth, for every n = 0..depth in one bottom-up pass.
std::vector<double> h45_profile(const CoverTree& tree, double s);
double h45_dp(const RegionOracle& oracle, double s, int n, int depth);

/// H^s_n for n = 0..depth.
using HProfile = std::function<std::vector<double>(double)>;

struct CriticalExponent {
  double s = 0.0;
  LinearFit fit;  // log H^s_n against n over the window at the returned s
  std::vector<double> profile;
  int iterations = 0;
};

/// Bisection on the sign of the growth slope of log H^s_n in n. Returns s_lo
/// when the profile is already flat there and s_lo == 0; throws
/// DegenerateInput when the bracket shows no sign change otherwise.
CriticalExponent critical_exponent(const HProfile& h, Window window, double s_lo, double s_hi, double tol,
                                   double slope_threshold = 1e-9);

DimReport dim3(const CountSeries& series, const EstimatorOptions& options);
DimReport dim4(const CoverTree& tree, const EstimatorOptions& options);

/// Runs one estimator on a digitized set.
DimReport estimate(const CoverTree& tree, Estimator estimator, const EstimatorOptions& options = {});

struct ReduceOptions {
  std::optional<int> depth;  // default_depth(range) when unset
  EstimatorOptions estimator;
  bool parallel = false;     // digitize the two sides concurrently
};

/// Runs the estimator on F directly and on alpha^{-1}(F) over the curve's
/// domain; the product is exponent_d * domain_value (factor 1 for dim1).
DimReport reduced_dim(const RegionOracle& oracle, const CurveFamily& cf, Estimator estimator,
                      const ReduceOptions& options = {});

/// H^s_{n,k} on a grid of s values (rows) and levels 0..depth (columns).
struct SweepResult {
  int k = 4;
  int depth = 0;
  std::vector<double> s;
  std::vector<double> diams;  // diam(Gamma_n) per column
  Eigen::MatrixXd h;
};

/// k = 3 uses h3; k = 4 and 5 use the cover DP.
SweepResult sweep(const CoverTree& tree, std::vector<double> s, int k);

/// Human-readable violations of: non-decreasing in n; non-increasing in s at
/// levels whose cells have diameter <= 1 (diam^s grows with s above 1).
std::vector<std::string> monotonicity_violations(const SweepResult& sweep);

}  // namespace fdr
