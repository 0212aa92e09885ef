#pragma once

// Level-wise construction of maps alpha: [0,1] -> Y between fractal
// structures, certification of the four refinement conditions, point
// evaluation and a quasi-inverse.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fdr/grid.hpp"

namespace fdr {

/// alpha_n as explicit tables between level-n cell indices.
struct LevelMap {
  int level = 0;
  std::vector<Index> forward;  // domain index -> range index
  // Inverse correspondence in CSR form: the domain cells mapped onto range
  // cell b are preimages[offsets[b] .. offsets[b+1]).
  std::vector<std::size_t> offsets;
  std::vector<Index> preimages;

  static LevelMap from_forward(int level, std::vector<Index> forward, Index range_count);

  std::span<const Index> preimages_of(Index b) const {
    return {preimages.data() + offsets[b], preimages.data() + offsets[b + 1]};
  }
};

/// Main-hypotheses constants: diam(alpha(A))^exponent = c * diam(A).
struct CurveConstants {
  double c = 1.0;
  double exponent = 1.0;
};

class CurveFamily {
 public:
  /// Index-level recursion: (level, index) -> index, computed without tables.
  using IndexRule = std::function<Index(int, Index)>;

  CurveFamily(std::string name, FractalStructure domain, FractalStructure range, IndexRule forward,
              IndexRule inverse, CurveConstants constants);

  /// A family given only by explicit per-level tables (levels 0..maps.size()-1).
  static CurveFamily from_level_maps(std::string name, FractalStructure domain, FractalStructure range,
                                     std::vector<LevelMap> maps, CurveConstants constants);

  const std::string& name() const { return name_; }
  const FractalStructure& domain() const { return domain_; }
  const FractalStructure& range() const { return range_; }
  const CurveConstants& constants() const { return constants_; }
  double exponent() const { return constants_.exponent; }

  /// Materializes the tables of every level <= depth. Not thread-safe; call
  /// before sharing the family.
  void extend(int depth);
  /// Deepest materialized level, or -1.
  int cached_depth() const { return static_cast<int>(maps_.size()) - 1; }
  const LevelMap& level_map(int n) const;

  /// Table lookups; throw LevelError above cached_depth().
  Cell image_cell(Cell a) const;
  std::vector<Cell> preimage_cells(Cell b) const;

  /// alpha_n(A) by the recursion rule when there is one, else from the tables.
  Index forward_index(int n, Index a) const;
  /// The lowest-index domain cell mapped onto b, if any.
  std::optional<Index> first_preimage(int n, Index b) const;

  bool has_rule() const { return static_cast<bool>(forward_); }

 private:
  std::string name_;
  FractalStructure domain_;
  FractalStructure range_;
  IndexRule forward_;
  IndexRule inverse_;
  CurveConstants constants_;
  std::vector<LevelMap> maps_;
};

/// Hilbert family from dyadic_interval_pow(d) onto cube(d), c = d^{d/2}.
CurveFamily hilbert_family(int d);

/// Arrowhead-ordered family from the triadic intervals onto the gasket,
/// exponent log 3 / log 2 and c = sqrt(2)^exponent.
CurveFamily gasket_family();

/// Copy of the first depth+1 levels of cf with the images of domain cells a
/// and b swapped at one level. Used to exercise the verifier.
CurveFamily swap_images(const CurveFamily& cf, int depth, int level, Index a, Index b);

struct ConditionResult {
  std::string condition;  // "i", "ii", "iii", "iv"
  bool passed = true;
  int level = -1;              // level of the first counterexample
  std::vector<Cell> witness;   // offending cells, domain side first
  std::string detail;
};

struct VerificationReport {
  int depth = 0;
  std::vector<ConditionResult> conditions;

  bool passed() const;
  const ConditionResult& operator[](const std::string& condition) const;
};

/// Exhaustive check of the refinement conditions (i)-(iv) at levels <= depth.
/// Extends the family's tables to depth.
VerificationReport verify_conditions(CurveFamily& cf, int depth);

/// Center of alpha_depth(A_depth), A_depth the lowest-index cell holding x.
Point eval_point(const CurveFamily& cf, double x, int depth);

/// Left endpoint of the pre-image interval of the lowest-index level-depth
/// range cell containing y.
double quasi_inverse(const CurveFamily& cf, const Point& y, int depth);

struct MainHypothesesFit {
  double c = 0.0;
  double exponent = 0.0;
  double max_residual = 0.0;
};

/// Fits (c, exponent) from the realized diameters of levels 1 and 2 and
/// reports the largest relative residual |diam(alpha(A))^e - c diam(A)| /
/// (c diam(A)) over every cell of levels 0..depth.
MainHypothesesFit verify_main_hypotheses(const CurveFamily& cf, int depth);

/// Diameter of a realized cell from its corner coordinates.
double realized_diameter(const FractalStructure& fs, Cell c);

/// Image-cell centers in domain order: the level-n polyline of the curve.
std::vector<Point> curve_polyline(const CurveFamily& cf, int n);

}  // namespace fdr
