#pragma once

// Fractal structures on Euclidean carriers and their cells.
//
// A cell is an exact integer address (level, canonical index). Geometry is a
// derived view computed on demand from the address, never the other way
// round, so count identities can be checked without rounding.

#include <Eigen/Dense>

#include <array>
#include <compare>
#include <cstdint>
#include <ranges>
#include <span>
#include <string>
#include <vector>

#include "fdr/errors.hpp"

namespace fdr {

using Index = std::uint64_t;
using Point = Eigen::VectorXd;

/// Largest cube dimension supported by the fixed-size coordinate buffers.
inline constexpr int kMaxDim = 16;

using Coords = std::array<Index, kMaxDim>;

enum class StructureKind {
  cube,                 // natural structure on [0,1]^d, side 2^-n
  dyadic_interval_pow,  // [0,1] with intervals of length 2^-nd
  triadic_interval,     // [0,1] with intervals of length 3^-n
  gasket,               // right Sierpinski gasket on (0,0),(1,0),(0,1)
};

struct Cell {
  int level = 0;
  Index index = 0;  // canonical position inside the level

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// A ball probe for the kappa-condition falsifier. Radius 0 is a point.
struct Probe {
  Point center;
  double radius = 0.0;
};

class FractalStructure {
 public:
  static FractalStructure cube(int d);
  static FractalStructure dyadic_interval_pow(int d);
  static FractalStructure triadic_interval();
  static FractalStructure gasket();

  StructureKind kind() const { return kind_; }
  /// The structure parameter d (1 for triadic intervals, 2 for the gasket).
  int dim() const { return d_; }
  /// Dimension of the space the realized cells live in.
  int ambient_dim() const;
  /// Short identifier: "cube2", "dyadic2", "triadic", "gasket".
  std::string name() const;

  /// Deepest level whose cell count fits the 64-bit address.
  int max_level() const;
  /// Number of cells in level n. Throws CapacityError past max_level().
  Index cell_count(int n) const;
  /// Diameter of every level-n cell (all builtin levels are uniform).
  double diam(int n) const;
  /// kappa': number of children of every cell.
  int splitting() const;
  /// Analytic kappa for cubes and intervals; the measured bound for the gasket.
  int kappa() const;
  bool kappa_is_empirical() const { return kind_ == StructureKind::gasket; }

  /// Every cell of level n in canonical order.
  auto level_cells(int n) const {
    const Index count = cell_count(n);
    return std::views::iota(Index{0}, count) |
           std::views::transform([n](Index i) { return Cell{n, i}; });
  }

  Cell child(Cell c, int j) const;
  std::vector<Cell> children(Cell c) const;
  Cell parent(Cell c) const;
  /// Ancestor of c at a coarser level.
  Cell ancestor(Cell c, int level) const;

  /// Per-axis grid coordinates (cube), the interval index, or the gasket word
  /// (one letter per level, most significant first).
  std::vector<Index> coords(Cell c) const;
  Cell from_coords(int n, std::span<const Index> coords) const;

  /// Cube helpers on the fixed-size buffer; only meaningful for cubes.
  Coords cube_coords(Cell c) const;
  Cell cube_cell(int n, const Coords& k) const;

  /// Vertices of the closed realization, one per column (convex hull = cell).
  Eigen::MatrixXd corners(Cell c) const;
  Point center(Cell c) const;

  /// Closed containment of a point in a realized cell.
  bool contains(Cell c, const Point& p) const;
  /// Realized containment of one cell in another (inner at a level >= outer).
  bool contains(Cell outer, Cell inner) const;
  /// Closed intersection of two cells of the same level.
  bool intersects(Cell a, Cell b) const;
  /// Euclidean distance from p to the closed realization of c.
  double distance(Cell c, const Point& p) const;

  bool operator==(const FractalStructure&) const = default;

 private:
  FractalStructure(StructureKind kind, int d) : kind_(kind), d_(d) {}

  void check_level(int n) const;
  // Gasket triangle origin in units of 2^-n.
  std::array<Index, 2> gasket_origin(Cell c) const;

  StructureKind kind_;
  int d_;
};

/// St(p, level n): every level-n cell whose closed realization contains p.
/// Throws CarrierError when p is outside the carrier.
std::vector<Cell> star(const FractalStructure& fs, const Point& p, int n);

/// The level-n cell containing p with the lowest canonical index.
Cell lowest_cell_containing(const FractalStructure& fs, const Point& p, int n);

/// Level-n cells at distance <= radius from center.
std::vector<Cell> cells_meeting_ball(const FractalStructure& fs,
                                     const Point& center, double radius, int n);

/// Balls of diameter diam(level n) centred at grid vertices, cell centres and
/// `random_points` seeded uniform points of the carrier.
std::vector<Probe> builtin_probe_suite(const FractalStructure& fs, int n,
                                       int random_points, std::uint64_t seed);

struct KappaReport {
  int max_count = 0;
  Probe witness;
};

/// Largest number of level-n cells met by any probe.
KappaReport check_kappa(const FractalStructure& fs, int n,
                        std::span<const Probe> probes);

}  // namespace fdr
