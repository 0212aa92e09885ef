#include "fdr/sets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <random>
#include <sstream>

namespace fdr {

namespace {

std::string describe(Cell c) {
  return "(level " + std::to_string(c.level) + ", index " + std::to_string(c.index) + ")";
}

void require_cube(const FractalStructure& fs, const char* what) {
  if (fs.kind() != StructureKind::cube) {
    throw StructureMismatch(std::string(what) + " needs a cube structure, got " + fs.name());
  }
}

// Exact grid bounds of a cube cell along one axis in units of 2^-n.
struct AxisRange {
  double lo, hi;
  bool closed_hi;  // the cell touches the carrier's upper face
};

AxisRange axis_range(Index k, int n) {
  const Index side = Index{1} << n;
  return {std::ldexp(static_cast<double>(k), -n), std::ldexp(static_cast<double>(k + 1), -n), k + 1 == side};
}

// Interleaved key of per-axis coordinates with `bits` bits each.
Index morton(const Coords& k, int d, int bits) {
  Index key = 0;
  for (int b = 0; b < bits; ++b) {
    for (int i = 0; i < d; ++i) key |= ((k[i] >> b) & 1) << (b * d + i);
  }
  return key;
}

// Half-open grid coordinate of x in [0,1] at resolution 2^bits.
Index grid_coord(double x, int bits) {
  const Index side = Index{1} << bits;
  const double t = std::floor(std::ldexp(x, bits));
  if (t <= 0.0) return 0;
  const Index k = static_cast<Index>(t);
  return k >= side ? side - 1 : k;
}

}  // namespace

RegionOracle::RegionOracle(std::string name, FractalStructure fs, Predicate predicate, bool exact)
    : name_(std::move(name)), fs_(std::move(fs)), predicate_(std::move(predicate)), exact_(exact) {}

CoverTree::CoverTree(FractalStructure fs, std::string source, int depth)
    : fs_(std::move(fs)), source_(std::move(source)) {
  if (depth < 0) throw LevelError("negative cover depth");
  fs_.cell_count(depth);
  levels_.resize(depth + 1);
  offsets_.resize(depth);
}

CellCover CoverTree::cover(int n) const {
  CellCover out{fs_, n, levels_.at(n), source_};
  std::sort(out.cells.begin(), out.cells.end());
  return out;
}

CoverTree CoverTree::from_covers(std::span<const CellCover> covers) {
  if (covers.empty()) throw LevelError("no covers given");
  const auto& fs = covers.front().structure;
  CoverTree tree(fs, covers.front().source, static_cast<int>(covers.size()) - 1);
  for (std::size_t n = 0; n < covers.size(); ++n) {
    if (covers[n].level != static_cast<int>(n)) throw LevelError("covers must list levels 0, 1, 2, ... in order");
    if (!(covers[n].structure == fs)) throw StructureMismatch("covers over different structures");
  }
  tree.levels_[0] = covers[0].cells;
  for (Index c : tree.levels_[0]) {
    if (c != 0) throw LevelError("level-0 cover holds a cell other than the root");
  }
  for (int n = 0; n + 1 < static_cast<int>(covers.size()); ++n) {
    const auto& parents = tree.levels_[n];
    // Sorted (index, position) view of the tree-ordered parents.
    std::vector<std::pair<Index, std::size_t>> lookup(parents.size());
    for (std::size_t i = 0; i < parents.size(); ++i) lookup[i] = {parents[i], i};
    std::sort(lookup.begin(), lookup.end());

    std::vector<std::pair<std::size_t, Index>> kids;
    kids.reserve(covers[n + 1].cells.size());
    for (Index c : covers[n + 1].cells) {
      const Index p = fs.parent({n + 1, c}).index;
      const auto it = std::lower_bound(lookup.begin(), lookup.end(), std::pair<Index, std::size_t>{p, 0});
      if (it == lookup.end() || it->first != p) {
        throw NonMonotoneOracle("cell " + describe({n + 1, c}) + " is covered but its parent is not");
      }
      kids.emplace_back(it->second, c);
    }
    std::sort(kids.begin(), kids.end());
    auto& offsets = tree.offsets_[n];
    offsets.assign(parents.size() + 1, 0);
    auto& level = tree.levels_[n + 1];
    level.reserve(kids.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < parents.size(); ++i) {
      offsets[i] = level.size();
      while (k < kids.size() && kids[k].first == i) level.push_back(kids[k++].second);
      if (offsets[i] == level.size()) {
        throw NonMonotoneOracle("cell " + describe({n, parents[i]}) + " is covered but none of its children is");
      }
    }
    offsets.back() = level.size();
  }
  return tree;
}

CoverTree digitize_tree(const RegionOracle& oracle, int depth) {
  const auto& fs = oracle.structure();
  CoverTree tree(fs, oracle.name(), depth);
  if (oracle.intersects({0, 0})) tree.levels_[0].push_back(0);
  const int split = fs.splitting();
  for (int n = 0; n < depth; ++n) {
    const auto& parents = tree.levels_[n];
    auto& next = tree.levels_[n + 1];
    auto& offsets = tree.offsets_[n];
    offsets.reserve(parents.size() + 1);
    for (Index p : parents) {
      offsets.push_back(next.size());
      for (int j = 0; j < split; ++j) {
        const Cell c = fs.child({n, p}, j);
        if (oracle.intersects(c)) next.push_back(c.index);
      }
      if (offsets.back() == next.size()) {
        throw NonMonotoneOracle("oracle " + oracle.name() + " accepts " + describe({n, p}) +
                                " but none of its children");
      }
    }
    offsets.push_back(next.size());
  }
  return tree;
}

CellCover digitize(const RegionOracle& oracle, const FractalStructure& fs, int n) {
  if (!(oracle.structure() == fs)) {
    throw StructureMismatch("oracle " + oracle.name() + " lives on " + oracle.structure().name() + ", not " +
                            fs.name());
  }
  return digitize_tree(oracle, n).cover(n);
}

std::optional<Cell> find_monotonicity_violation(const RegionOracle& oracle, int depth) {
  const auto& fs = oracle.structure();
  for (int n = 0; n < depth; ++n) {
    for (Cell c : fs.level_cells(n)) {
      const bool here = oracle.intersects(c);
      bool below = false;
      for (int j = 0; j < fs.splitting(); ++j) below = oracle.intersects(fs.child(c, j)) || below;
      if (here != below) return c;
    }
  }
  return std::nullopt;
}

CellCover preimage_cover(const CurveFamily& cf, const CellCover& cover) {
  if (!(cover.structure == cf.range())) {
    throw StructureMismatch("cover lives on " + cover.structure.name() + ", curve " + cf.name() + " maps onto " +
                            cf.range().name());
  }
  const LevelMap& map = cf.level_map(cover.level);
  CellCover out{cf.domain(), cover.level, {}, cover.source + "@" + cf.name()};
  for (Index b : cover.cells) {
    const auto pre = map.preimages_of(b);
    out.cells.insert(out.cells.end(), pre.begin(), pre.end());
  }
  std::sort(out.cells.begin(), out.cells.end());
  return out;
}

RegionOracle transported(const CurveFamily& cf, const RegionOracle& oracle) {
  if (!(oracle.structure() == cf.range())) {
    throw StructureMismatch("oracle " + oracle.name() + " lives on " + oracle.structure().name() + ", curve " +
                            cf.name() + " maps onto " + cf.range().name());
  }
  return RegionOracle(
      oracle.name() + "@" + cf.name(), cf.domain(),
      [&cf, &oracle](Cell a) { return oracle.intersects({a.level, cf.forward_index(a.level, a.index)}); },
      oracle.exact());
}

namespace oracles {

RegionOracle full(const FractalStructure& fs) {
  return RegionOracle("full", fs, [](Cell) { return true; });
}

RegionOracle single_point(const FractalStructure& fs, const Point& p) {
  star(fs, p, std::min(fs.max_level(), 24));  // validates the carrier
  return RegionOracle("point", fs, [fs, p](Cell c) { return fs.contains(c, p); });
}

RegionOracle sierpinski(int d) {
  const auto fs = FractalStructure::cube(d);
  return RegionOracle("sierpinski", fs, [fs, d](Cell c) {
    const Coords k = fs.cube_coords(c);
    Index seen = 0;
    for (int i = 0; i < d; ++i) {
      if (seen & k[i]) return false;
      seen |= k[i];
    }
    return true;
  });
}

RegionOracle cantor4_product(int d) {
  const auto fs = FractalStructure::cube(d);
  return RegionOracle("cantor4", fs, [fs, d](Cell c) {
    const Coords k = fs.cube_coords(c);
    const int n = c.level;
    for (int i = 0; i < d; ++i) {
      for (int j = 0; 2 * (j + 1) <= n; ++j) {
        const Index digit = (k[i] >> (n - 2 * (j + 1))) & 3;
        if (digit == 1 || digit == 2) return false;
      }
    }
    return true;
  });
}

RegionOracle diagonal(int d) {
  const auto fs = FractalStructure::cube(d);
  return RegionOracle("diagonal", fs, [fs, d](Cell c) {
    const Coords k = fs.cube_coords(c);
    for (int i = 1; i < d; ++i) {
      if (k[i] != k[0]) return false;
    }
    return true;
  });
}

RegionOracle segment(const Point& a, const Point& b) {
  const int d = static_cast<int>(a.size());
  if (b.size() != a.size()) throw CarrierError("segment endpoints of different dimension");
  const auto fs = FractalStructure::cube(d);
  star(fs, a, 0);
  star(fs, b, 0);
  const Point dir = b - a;
  return RegionOracle("segment", fs, [fs, a, dir, d](Cell c) {
    const Coords k = fs.cube_coords(c);
    // Parameter interval of the points of a + t*dir inside the cell.
    double t_lo = 0.0, t_hi = 1.0;
    bool lo_closed = true, hi_closed = true;
    auto raise_lo = [&](double t, bool closed) {
      if (t > t_lo || (t == t_lo && !closed)) {
        t_lo = t;
        lo_closed = closed;
      }
    };
    auto drop_hi = [&](double t, bool closed) {
      if (t < t_hi || (t == t_hi && !closed)) {
        t_hi = t;
        hi_closed = closed;
      }
    };
    for (int i = 0; i < d; ++i) {
      const AxisRange r = axis_range(k[i], c.level);
      if (dir[i] == 0.0) {
        if (a[i] < r.lo || a[i] > r.hi || (a[i] == r.hi && !r.closed_hi)) return false;
        continue;
      }
      const double t1 = (r.lo - a[i]) / dir[i];
      const double t2 = (r.hi - a[i]) / dir[i];
      if (dir[i] > 0.0) {
        raise_lo(t1, true);
        drop_hi(t2, r.closed_hi);
      } else {
        raise_lo(t2, r.closed_hi);
        drop_hi(t1, true);
      }
    }
    return t_lo < t_hi || (t_lo == t_hi && lo_closed && hi_closed);
  });
}

RegionOracle point_cloud(int d, std::vector<Point> points) {
  const auto fs = FractalStructure::cube(d);
  const int bits = std::min(52, 62 / d);
  std::vector<Index> keys;
  keys.reserve(points.size());
  for (const Point& p : points) {
    star(fs, p, 0);
    Coords k{};
    for (int i = 0; i < d; ++i) k[i] = grid_coord(p[i], bits);
    keys.push_back(morton(k, d, bits));
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return RegionOracle(
      "points", fs,
      [fs, d, bits, keys = std::move(keys)](Cell c) {
        if (c.level > bits) throw LevelError("point cloud resolution is " + std::to_string(bits) + " levels");
        Coords k = fs.cube_coords(c);
        for (int i = 0; i < d; ++i) k[i] <<= bits - c.level;
        const Index lo = morton(k, d, bits);
        const Index hi = lo + (Index{1} << ((bits - c.level) * d));
        const auto it = std::lower_bound(keys.begin(), keys.end(), lo);
        return it != keys.end() && *it < hi;
      },
      false);
}

std::vector<CatalogEntry> catalog() {
  return {
      {"full", "the whole carrier (any structure)"},
      {"point", "the single point (1/3, ..., 1/3), or (1/3, 0) on the gasket"},
      {"sierpinski", "cube cells whose coordinates share no set bit (right gasket for d = 2)"},
      {"cantor4", "product of the base-4 Cantor set with digits {0,3}"},
      {"diagonal", "the main diagonal of the cube"},
      {"gasket-native", "the whole gasket structure"},
  };
}

RegionOracle by_name(const std::string& name, const FractalStructure& fs) {
  if (name == "full") return full(fs);
  if (name == "gasket-native") {
    if (fs.kind() != StructureKind::gasket) throw StructureMismatch("gasket-native needs the gasket structure");
    return RegionOracle("gasket-native", fs, [](Cell) { return true; });
  }
  if (name == "point") {
    Point p = Point::Constant(fs.ambient_dim(), 1.0 / 3.0);
    if (fs.kind() == StructureKind::gasket) p[1] = 0.0;
    return single_point(fs, p);
  }
  if (name == "sierpinski" || name == "cantor4" || name == "diagonal") {
    require_cube(fs, name.c_str());
    if (name == "sierpinski") return sierpinski(fs.dim());
    if (name == "cantor4") return cantor4_product(fs.dim());
    return diagonal(fs.dim());
  }
  throw std::invalid_argument("unknown oracle '" + name + "'");
}

}  // namespace oracles

double AffineMap::ratio() const {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(linear).singularValues()(0);
}

namespace {

Ifs half_scale_maps(const std::vector<Point>& offsets) {
  Ifs out;
  for (const Point& v : offsets) {
    out.push_back({Eigen::MatrixXd::Identity(v.size(), v.size()) * 0.5, v});
  }
  return out;
}

Point vec2(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
}

void check_ifs(const Ifs& ifs, int d) {
  if (ifs.empty()) throw DegenerateInput("empty IFS");
  for (const auto& f : ifs) {
    if (f.linear.rows() != d || f.linear.cols() != d || f.offset.size() != d) {
      throw StructureMismatch("IFS map dimension differs from the cube dimension");
    }
    if (!(f.ratio() < 1.0)) throw DegenerateInput("IFS map is not a contraction");
    const Eigen::VectorXd half = Eigen::VectorXd::Constant(d, 0.5);
    const Eigen::VectorXd mid = f(half);
    const Eigen::VectorXd ext = f.linear.cwiseAbs() * half;
    if ((mid - ext).minCoeff() < 0.0 || (mid + ext).maxCoeff() > 1.0) {
      throw DegenerateInput("IFS map does not send the unit cube into itself");
    }
  }
}

void superset_cells(const Ifs& ifs, const FractalStructure& fs, int n, const Eigen::MatrixXd& linear,
                    const Eigen::VectorXd& offset, int remaining, std::vector<Index>& out) {
  if (remaining > 0) {
    for (const auto& f : ifs) {
      superset_cells(ifs, fs, n, linear * f.linear, linear * f.offset + offset, remaining - 1, out);
    }
    return;
  }
  const int d = fs.dim();
  const Eigen::VectorXd half = Eigen::VectorXd::Constant(d, 0.5);
  const Eigen::VectorXd mid = linear * half + offset;
  const Eigen::VectorXd ext = linear.cwiseAbs() * half;
  const Index side = Index{1} << n;
  Coords first{}, last{};
  for (int i = 0; i < d; ++i) {
    const double lo = std::ldexp(mid[i] - ext[i], n), hi = std::ldexp(mid[i] + ext[i], n);
    const double a = std::max(0.0, std::ceil(lo) - 1.0);
    const double b = std::min(static_cast<double>(side - 1), std::floor(hi));
    first[i] = static_cast<Index>(a);
    last[i] = static_cast<Index>(b);
  }
  Coords k = first;
  while (true) {
    out.push_back(fs.cube_cell(n, k).index);
    int i = 0;
    while (i < d && k[i] == last[i]) {
      k[i] = first[i];
      ++i;
    }
    if (i == d) break;
    ++k[i];
  }
}

}  // namespace

Ifs gasket_ifs() { return half_scale_maps({vec2(0, 0), vec2(0.5, 0), vec2(0, 0.5)}); }

Ifs square_ifs() { return half_scale_maps({vec2(0, 0), vec2(0.5, 0), vec2(0, 0.5), vec2(0.5, 0.5)}); }

std::vector<Point> chaos_game(const Ifs& ifs, std::uint64_t samples, std::uint64_t seed) {
  if (ifs.empty()) throw DegenerateInput("empty IFS");
  const auto& f0 = ifs.front();
  const auto d = f0.offset.size();
  Point x = (Eigen::MatrixXd::Identity(d, d) - f0.linear).partialPivLu().solve(f0.offset);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, ifs.size() - 1);
  std::vector<Point> out;
  out.reserve(samples + 1);
  for (std::uint64_t s = 0; s <= samples; ++s) {
    out.push_back(x);
    x = ifs[pick(rng)](x);
  }
  return out;
}

CellCover ifs_cover(const Ifs& ifs, const FractalStructure& fs, int n, const IfsOptions& options) {
  require_cube(fs, "ifs_cover");
  const int d = fs.dim();
  check_ifs(ifs, d);
  fs.cell_count(n);
  CellCover out{fs, n, {}, options.mode == IfsMode::superset ? "ifs-superset" : "ifs-subset"};
  if (options.mode == IfsMode::superset) {
    superset_cells(ifs, fs, n, Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Zero(d), n, out.cells);
  } else {
    const auto points = chaos_game(ifs, options.samples, options.seed);
    out.cells.reserve(points.size());
    for (const Point& x : points) {
      Coords k{};
      for (int i = 0; i < d; ++i) k[i] = grid_coord(std::clamp(x[i], 0.0, 1.0), n);
      out.cells.push_back(fs.cube_cell(n, k).index);
    }
  }
  std::sort(out.cells.begin(), out.cells.end());
  out.cells.erase(std::unique(out.cells.begin(), out.cells.end()), out.cells.end());
  return out;
}

std::vector<Point> read_point_csv(std::istream& in, int d) {
  std::vector<Point> out;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> values;
    bool numeric = true;
    std::stringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      const auto b = field.find_first_not_of(" \t");
      const auto e = field.find_last_not_of(" \t");
      const std::string f = b == std::string::npos ? "" : field.substr(b, e - b + 1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()) {
        numeric = false;
        break;
      }
      values.push_back(v);
    }
    if (!numeric) {
      if (out.empty() && row == 1) continue;  // header
      throw std::invalid_argument("row " + std::to_string(row) + ": not a number");
    }
    if (static_cast<int>(values.size()) != d) {
      throw std::invalid_argument("row " + std::to_string(row) + ": expected " + std::to_string(d) + " columns");
    }
    Point p(d);
    for (int i = 0; i < d; ++i) {
      if (!(values[i] >= 0.0 && values[i] <= 1.0)) {
        throw CarrierError("row " + std::to_string(row) + ": coordinate outside [0,1]");
      }
      p[i] = values[i];
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace fdr
