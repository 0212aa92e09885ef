#include "doctest.h"

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "fdr/sets.hpp"

using namespace fdr;

namespace {

Point pt(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
}

std::vector<Index> all_indices(const FractalStructure& fs, int n) {
  std::vector<Index> out;
  for (Cell c : fs.level_cells(n)) out.push_back(c.index);
  return out;
}

// Half-open cube cell of a point, closed on the upper faces.
Index cell_of(const FractalStructure& cube, const Point& p, int n) {
  Coords k{};
  const double side = std::ldexp(1.0, n);
  for (int i = 0; i < cube.dim(); ++i) k[i] = std::min(static_cast<Index>(p[i] * side), static_cast<Index>(side) - 1);
  return cube.cube_cell(n, k).index;
}

}  // namespace

TEST_CASE("sierpinski cover counts") {
  const auto tree = digitize_tree(oracles::sierpinski(2), 10);
  for (int n = 0; n <= 10; ++n) CHECK(tree.count(n) == static_cast<Index>(std::pow(3, n)));
  const auto tree3 = digitize_tree(oracles::sierpinski(3), 6);
  for (int n = 0; n <= 6; ++n) CHECK(tree3.count(n) == static_cast<Index>(std::pow(4, n)));

  // Independent construction: the bounding squares of the level-4 gasket triangles.
  const auto cube2 = FractalStructure::cube(2);
  const auto gasket = FractalStructure::gasket();
  std::set<Index> expected;
  for (Cell t : gasket.level_cells(4)) {
    const Eigen::VectorXd lo = gasket.corners(t).rowwise().minCoeff() * 16.0;
    Coords k{};
    k[0] = static_cast<Index>(lo[0]);
    k[1] = static_cast<Index>(lo[1]);
    expected.insert(cube2.cube_cell(4, k).index);
  }
  const auto cover = digitize(oracles::sierpinski(2), cube2, 4);
  CHECK(cover.count() == 81);
  CHECK(std::vector<Index>(expected.begin(), expected.end()) == cover.cells);
}

TEST_CASE("cantor4 product cover") {
  const auto cube2 = FractalStructure::cube(2);
  for (int m = 0; m <= 4; ++m) {
    // Per-axis cells at level 2m: base-4 digits all in {0,3}.
    std::vector<Index> axis;
    for (Index w = 0; w < (Index{1} << m); ++w) {
      Index k = 0;
      for (int j = 0; j < m; ++j) k = 4 * k + (((w >> (m - 1 - j)) & 1) ? 3 : 0);
      axis.push_back(k);
    }
    std::vector<Index> expected;
    for (Index a : axis) {
      for (Index b : axis) {
        Coords k{};
        k[0] = a;
        k[1] = b;
        expected.push_back(cube2.cube_cell(2 * m, k).index);
      }
    }
    std::sort(expected.begin(), expected.end());
    CHECK(digitize(oracles::cantor4_product(2), cube2, 2 * m).cells == expected);
  }
  const auto tree = digitize_tree(oracles::cantor4_product(1), 9);
  CHECK(tree.count(8) == 16);
  CHECK(tree.count(9) == 32);
}

TEST_CASE("builtin oracles are monotone") {
  std::vector<RegionOracle> list{oracles::sierpinski(2),
                                 oracles::sierpinski(3),
                                 oracles::cantor4_product(2),
                                 oracles::diagonal(2),
                                 oracles::diagonal(3),
                                 oracles::full(FractalStructure::gasket()),
                                 oracles::single_point(FractalStructure::cube(2), pt(0.5, 0.25)),
                                 oracles::single_point(FractalStructure::gasket(), pt(0.5, 0.0)),
                                 oracles::segment(pt(0.1, 0.9), pt(0.8, 0.2)),
                                 oracles::segment(pt(0.0, 1.0), pt(1.0, 0.0))};
  for (const auto& o : list) {
    CAPTURE(o.name());
    CHECK_FALSE(find_monotonicity_violation(o, o.structure().dim() == 3 ? 3 : 5).has_value());
  }
}

TEST_CASE("lines and points") {
  const auto cube2 = FractalStructure::cube(2);
  const auto diag = digitize_tree(oracles::diagonal(2), 12);
  const auto seg = digitize_tree(oracles::segment(pt(0, 0), pt(1, 1)), 12);
  for (int n = 0; n <= 12; ++n) {
    CHECK(diag.count(n) == (Index{1} << n));
    CHECK(seg.cover(n).cells == diag.cover(n).cells);
  }
  const auto flat = digitize_tree(oracles::segment(pt(0, 0.3), pt(1, 0.3)), 8);
  CHECK(flat.count(8) == 256);

  // A generic segment against dense sampling plus every grid crossing.
  const Point a = pt(0.13, 0.71), b = pt(0.94, 0.08);
  const int n = 7;
  std::set<Index> sampled;
  std::vector<double> ts;
  for (int s = 0; s <= 100000; ++s) ts.push_back(s / 100000.0);
  for (Index k = 0; k <= 128; ++k) {
    for (int i = 0; i < 2; ++i) {
      const double t = (k / 128.0 - a[i]) / (b[i] - a[i]);
      if (t >= 0 && t <= 1) ts.push_back(t);
    }
  }
  for (double t : ts) sampled.insert(cell_of(cube2, a + t * (b - a), n));
  const auto cover = digitize(oracles::segment(a, b), cube2, n);
  for (Index s : sampled) CHECK(std::binary_search(cover.cells.begin(), cover.cells.end(), s));
  CHECK(cover.count() <= sampled.size() + 4);

  for (int m = 0; m <= 20; ++m) {
    CHECK(digitize(oracles::single_point(cube2, pt(1.0 / 3, 1.0 / 3)), cube2, m).count() == 1);
  }
  CHECK(digitize(oracles::single_point(cube2, pt(0.5, 0.5)), cube2, 6).count() == 4);
  CHECK_THROWS_AS(oracles::single_point(FractalStructure::gasket(), pt(0.4, 0.4)), CarrierError);
}

TEST_CASE("point clouds") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point> points;
  for (int i = 0; i < 300; ++i) points.push_back(pt(unit(rng), unit(rng)));
  points.push_back(pt(1.0, 1.0));
  points.push_back(pt(0.5, 0.0));
  const auto cube2 = FractalStructure::cube(2);
  const auto tree = digitize_tree(oracles::point_cloud(2, points), 12);
  for (int n = 0; n <= 12; ++n) {
    std::set<Index> direct;
    for (const auto& p : points) direct.insert(cell_of(cube2, p, n));
    CHECK(tree.cover(n).cells == std::vector<Index>(direct.begin(), direct.end()));
  }
  CHECK_THROWS_AS(digitize_tree(oracles::point_cloud(2, points), 32), CapacityError);

  std::istringstream csv("x,y\n0.25, 0.5\n\n1,0\r\n");
  const auto read = read_point_csv(csv, 2);
  REQUIRE(read.size() == 2);
  CHECK(read[0] == pt(0.25, 0.5));
  CHECK(read[1] == pt(1, 0));
  std::istringstream outside("0.5,1.5\n");
  CHECK_THROWS_AS(read_point_csv(outside, 2), CarrierError);
  std::istringstream ragged("0.5\n");
  CHECK_THROWS_AS(read_point_csv(ragged, 2), std::invalid_argument);
  std::istringstream late_header("0.5,0.5\nx,y\n");
  CHECK_THROWS_AS(read_point_csv(late_header, 2), std::invalid_argument);
}

TEST_CASE("cover trees from independent covers") {
  const auto o = oracles::sierpinski(2);
  const auto tree = digitize_tree(o, 6);
  std::vector<CellCover> covers;
  for (int n = 0; n <= 6; ++n) covers.push_back(digitize(o, o.structure(), n));
  const auto rebuilt = CoverTree::from_covers(covers);
  for (int n = 0; n <= 6; ++n) {
    CHECK(std::vector<Index>(rebuilt.level(n).begin(), rebuilt.level(n).end()) ==
          std::vector<Index>(tree.level(n).begin(), tree.level(n).end()));
    if (n < 6) {
      CHECK(std::vector<std::size_t>(rebuilt.offsets(n).begin(), rebuilt.offsets(n).end()) ==
            std::vector<std::size_t>(tree.offsets(n).begin(), tree.offsets(n).end()));
    }
  }
  // Children of the i-th cell really are its children.
  const auto& fs = tree.structure();
  for (int n = 0; n < 6; ++n) {
    const auto lv = tree.level(n), next = tree.level(n + 1);
    const auto off = tree.offsets(n);
    for (std::size_t i = 0; i < lv.size(); ++i) {
      for (std::size_t j = off[i]; j < off[i + 1]; ++j) CHECK(fs.parent({n + 1, next[j]}).index == lv[i]);
    }
  }

  covers[3].cells.pop_back();
  covers[4].cells.clear();
  CHECK_THROWS_AS(CoverTree::from_covers(covers), NonMonotoneOracle);
}

TEST_CASE("non-monotone oracles are rejected") {
  const auto cube2 = FractalStructure::cube(2);
  // Accepts the root and the level-1 cell 3, rejects everything below.
  const RegionOracle bad("bad", cube2, [](Cell c) { return c.level == 0 || (c.level == 1 && c.index == 3); });
  CHECK_THROWS_AS(digitize_tree(bad, 3), NonMonotoneOracle);
  const auto v = find_monotonicity_violation(bad, 3);
  REQUIRE(v.has_value());
  CHECK(*v == Cell{1, 3});
}

TEST_CASE("transport through a curve") {
  auto h2 = hilbert_family(2);
  h2.extend(8);
  for (const auto& name : {"full", "point", "sierpinski", "cantor4", "diagonal"}) {
    CAPTURE(name);
    const auto o = oracles::by_name(name, h2.range());
    const auto pulled = transported(h2, o);
    const auto tree = digitize_tree(pulled, 8);
    for (int n = 0; n <= 8; ++n) {
      const auto cover = digitize(o, h2.range(), n);
      const auto pre = preimage_cover(h2, cover);
      CHECK(pre.count() == cover.count());
      CHECK(tree.cover(n).cells == pre.cells);
    }
  }
  CHECK_THROWS_AS(preimage_cover(h2, digitize(oracles::full(h2.range()), h2.range(), 9)), LevelError);
  CHECK_THROWS_AS(transported(h2, oracles::full(FractalStructure::gasket())), StructureMismatch);

  auto gs = gasket_family();
  gs.extend(6);
  const auto native = oracles::by_name("gasket-native", gs.range());
  CHECK(preimage_cover(gs, digitize(native, gs.range(), 6)).cells == all_indices(gs.domain(), 6));
}

TEST_CASE("catalog names resolve") {
  const auto cube2 = FractalStructure::cube(2);
  for (const auto& entry : oracles::catalog()) {
    const auto& fs = entry.name == "gasket-native" ? FractalStructure::gasket() : cube2;
    CHECK(oracles::by_name(entry.name, fs).name() == entry.name);
  }
  CHECK_THROWS_AS(oracles::by_name("sierpinski", FractalStructure::gasket()), StructureMismatch);
  CHECK_THROWS_AS(oracles::by_name("nope", cube2), std::invalid_argument);
}

TEST_CASE("IFS covers bracket the digit cover") {
  const auto cube2 = FractalStructure::cube(2);
  for (int n = 1; n <= 8; ++n) {
    const auto digits = digitize(oracles::sierpinski(2), cube2, n);
    const auto super = ifs_cover(gasket_ifs(), cube2, n);
    const auto sub = ifs_cover(gasket_ifs(), cube2, n, {IfsMode::subset, 200000, 9});
    CHECK(std::includes(super.cells.begin(), super.cells.end(), digits.cells.begin(), digits.cells.end()));
    CHECK(std::includes(super.cells.begin(), super.cells.end(), sub.cells.begin(), sub.cells.end()));
    CHECK(std::includes(digits.cells.begin(), digits.cells.end(), sub.cells.begin(), sub.cells.end()));
    // Extra superset cells only touch digit cells.
    for (Index c : super.cells) {
      if (std::binary_search(digits.cells.begin(), digits.cells.end(), c)) continue;
      bool touches = false;
      for (Index d : digits.cells) touches = touches || cube2.intersects({n, c}, {n, d});
      CHECK(touches);
    }
    if (n <= 6) CHECK(sub.cells == digits.cells);
  }
  CHECK(ifs_cover(square_ifs(), cube2, 5).cells == all_indices(cube2, 5));

  Ifs expanding = gasket_ifs();
  expanding[1].linear *= 2.5;
  CHECK_THROWS_AS(ifs_cover(expanding, cube2, 3), DegenerateInput);
  CHECK(gasket_ifs()[0].ratio() == doctest::Approx(0.5));
  CHECK_THROWS_AS(ifs_cover(gasket_ifs(), FractalStructure::gasket(), 3), StructureMismatch);
}
