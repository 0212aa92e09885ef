#pragma once

// Target sets as cell-membership oracles, their per-level covers A_n(F) and
// transport of covers through a curve family.

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fdr/curve.hpp"
#include "fdr/grid.hpp"

namespace fdr {

/// Decides whether a cell meets the target set. Predicates must be monotone
/// under refinement: a disjoint cell has only disjoint descendants and an
/// intersecting cell has at least one intersecting child.
class RegionOracle {
 public:
  using Predicate = std::function<bool(Cell)>;

  RegionOracle(std::string name, FractalStructure fs, Predicate predicate, bool exact = true);

  bool intersects(Cell c) const { return predicate_(c); }
  const std::string& name() const { return name_; }
  const FractalStructure& structure() const { return fs_; }
  /// False when the predicate is a sampled approximation of the set.
  bool exact() const { return exact_; }

 private:
  std::string name_;
  FractalStructure fs_;
  Predicate predicate_;
  bool exact_;
};

/// A_n(F) as a sorted array of canonical indices.
struct CellCover {
  FractalStructure structure;
  int level = 0;
  std::vector<Index> cells;
  std::string source;

  std::size_t count() const { return cells.size(); }
  bool operator==(const CellCover&) const = default;
};

/// Covers of every level 0..depth linked parent to children. Level n+1 is
/// stored grouped by parent so the children of the i-th level-n cell are
/// level(n+1)[offsets(n)[i] .. offsets(n)[i+1]).
class CoverTree {
 public:
  CoverTree(FractalStructure fs, std::string source, int depth);

  /// Rebuilds the parent links from independent per-level covers (levels
  /// 0..covers.size()-1). Throws NonMonotoneOracle when the covers are not
  /// refinement-consistent.
  static CoverTree from_covers(std::span<const CellCover> covers);

  const FractalStructure& structure() const { return fs_; }
  const std::string& source() const { return source_; }
  int depth() const { return static_cast<int>(levels_.size()) - 1; }
  bool empty() const { return levels_.front().empty(); }

  std::span<const Index> level(int n) const { return levels_.at(n); }
  std::span<const std::size_t> offsets(int n) const { return offsets_.at(n); }
  std::uint64_t count(int n) const { return levels_.at(n).size(); }
  CellCover cover(int n) const;

 private:
  friend CoverTree digitize_tree(const RegionOracle& oracle, int depth);

  FractalStructure fs_;
  std::string source_;
  std::vector<std::vector<Index>> levels_;
  std::vector<std::vector<std::size_t>> offsets_;  // one per level < depth
};

/// Recursive descent from the root pruning disjoint subtrees.
CoverTree digitize_tree(const RegionOracle& oracle, int depth);

/// A_n(F) for one level.
CellCover digitize(const RegionOracle& oracle, const FractalStructure& fs, int n);

/// Exhaustive monotonicity check over every cell of levels < depth; returns
/// the first violating cell, if any.
std::optional<Cell> find_monotonicity_violation(const RegionOracle& oracle, int depth);

/// {A in Gamma_n : alpha_n(A) in cover}. The cover level must be cached in cf.
CellCover preimage_cover(const CurveFamily& cf, const CellCover& cover);

/// alpha^{-1}(F) as an oracle on the curve's domain: A meets alpha^{-1}(F)
/// iff alpha_n(A) meets F. Keeps references to cf and oracle.
RegionOracle transported(const CurveFamily& cf, const RegionOracle& oracle);

namespace oracles {

RegionOracle full(const FractalStructure& fs);
/// Cells whose closed realization contains p.
RegionOracle single_point(const FractalStructure& fs, const Point& p);
/// Cube cells whose coordinates pairwise share no set bit; for d = 2 the
/// right Sierpinski gasket (k1 AND k2 == 0), (d+1)^n cells at level n.
RegionOracle sierpinski(int d = 2);
/// Product of the base-4 Cantor set with digits {0,3}: a cell qualifies when
/// every completed base-4 digit of every coordinate is 0 or 3.
RegionOracle cantor4_product(int d);
/// Main diagonal {(t,...,t)}, half-open cells: 2^n cells at level n.
RegionOracle diagonal(int d);
/// Segment from a to b with half-open cells [k, k+1)/2^n, closed on the
/// carrier's upper faces.
RegionOracle segment(const Point& a, const Point& b);
/// Cells holding at least one point, half-open membership as for segments.
RegionOracle point_cloud(int d, std::vector<Point> points);

struct CatalogEntry {
  std::string name;
  std::string description;
};

/// Names accepted by by_name(), with a one-line description each.
std::vector<CatalogEntry> catalog();

/// Builtin oracle by catalog name on the given structure.
RegionOracle by_name(const std::string& name, const FractalStructure& fs);

}  // namespace oracles

/// Affine contraction x -> linear * x + offset.
struct AffineMap {
  Eigen::MatrixXd linear;
  Eigen::VectorXd offset;

  Point operator()(const Point& x) const { return linear * x + offset; }
  /// Operator 2-norm of the linear part.
  double ratio() const;
};

using Ifs = std::vector<AffineMap>;

/// Three half-scale maps onto the right gasket.
Ifs gasket_ifs();
/// Four half-scale maps tiling the unit square.
Ifs square_ifs();

enum class IfsMode { superset, subset };

struct IfsOptions {
  IfsMode mode = IfsMode::superset;
  std::uint64_t samples = 1'000'000;  // chaos-game iterations (subset mode)
  std::uint64_t seed = 1;
};

/// `samples` chaos-game iterates starting at the fixed point of the first map.
std::vector<Point> chaos_game(const Ifs& ifs, std::uint64_t samples, std::uint64_t seed);

/// Superset: cube cells meeting a bounding box of some piece of the n-th
/// Hutchinson iterate of the unit cube (contains the true cover). Subset:
/// cells holding chaos-game samples (contained in the true cover).
/// Throws DegenerateInput for a non-contractive map.
CellCover ifs_cover(const Ifs& ifs, const FractalStructure& fs, int n, const IfsOptions& options = {});

/// Points in [0,1]^d, one per row, comma separated, optional header row.
std::vector<Point> read_point_csv(std::istream& in, int d);

}  // namespace fdr
