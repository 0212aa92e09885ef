#include "fdr/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <set>

namespace fdr {

namespace {

// Largest kappa-condition count observed for the gasket with the builtin
// probe suite (vertices, centroids, 50k random balls) at levels 1..8. No
// analytic constant is known; see test_grid.cpp.
constexpr int kGasketKappa = 5;

constexpr int kMaxTriadicLevel = 39;  // 3^39 < 2^63

Index pow3(int n) {
  Index r = 1;
  for (int i = 0; i < n; ++i) r *= 3;
  return r;
}

Index mask(int bits) { return bits >= 64 ? ~Index{0} : (Index{1} << bits) - 1; }

// Per-axis candidate cells whose closed realization [k, k+1]/m contains the
// scaled coordinate t = x*m.
void axis_candidates(double t, Index m, std::vector<Index>& out) {
  out.clear();
  const double fl = std::floor(t);
  Index k = fl <= 0.0 ? 0 : static_cast<Index>(fl);
  if (k >= m) k = m - 1;
  if (t == static_cast<double>(k) && k > 0) out.push_back(k - 1);
  out.push_back(k);
  if (t == static_cast<double>(k + 1) && k + 1 < m) out.push_back(k + 1);
}

double sq(double x) { return x * x; }

double point_segment_distance_sq(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                                 const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (a + t * ab - p).squaredNorm();
}

}  // namespace

FractalStructure FractalStructure::cube(int d) {
  if (d < 1 || d > kMaxDim) throw CapacityError("cube dimension out of range: " + std::to_string(d));
  return {StructureKind::cube, d};
}

FractalStructure FractalStructure::dyadic_interval_pow(int d) {
  if (d < 1 || d > kMaxDim) {
    throw CapacityError("interval granularity out of range: " + std::to_string(d));
  }
  return {StructureKind::dyadic_interval_pow, d};
}

FractalStructure FractalStructure::triadic_interval() { return {StructureKind::triadic_interval, 1}; }

FractalStructure FractalStructure::gasket() { return {StructureKind::gasket, 2}; }

int FractalStructure::ambient_dim() const {
  switch (kind_) {
    case StructureKind::cube: return d_;
    case StructureKind::gasket: return 2;
    default: return 1;
  }
}

std::string FractalStructure::name() const {
  switch (kind_) {
    case StructureKind::cube: return "cube" + std::to_string(d_);
    case StructureKind::dyadic_interval_pow: return "dyadic" + std::to_string(d_);
    case StructureKind::triadic_interval: return "triadic";
    case StructureKind::gasket: return "gasket";
  }
  return {};
}

int FractalStructure::max_level() const {
  switch (kind_) {
    case StructureKind::cube:
    case StructureKind::dyadic_interval_pow: return 63 / d_;
    default: return kMaxTriadicLevel;
  }
}

void FractalStructure::check_level(int n) const {
  if (n < 0) throw LevelError("negative level");
  if (n > max_level()) {
    throw CapacityError("level " + std::to_string(n) + " exceeds the address width of " + name() +
                        " (max " + std::to_string(max_level()) + ")");
  }
}

Index FractalStructure::cell_count(int n) const {
  check_level(n);
  switch (kind_) {
    case StructureKind::cube:
    case StructureKind::dyadic_interval_pow: return Index{1} << (n * d_);
    default: return pow3(n);
  }
}

double FractalStructure::diam(int n) const {
  switch (kind_) {
    case StructureKind::cube: return std::ldexp(std::sqrt(static_cast<double>(d_)), -n);
    case StructureKind::dyadic_interval_pow: return std::ldexp(1.0, -n * d_);
    case StructureKind::triadic_interval: return std::pow(3.0, -n);
    case StructureKind::gasket: return std::ldexp(std::sqrt(2.0), -n);
  }
  return 0.0;
}

int FractalStructure::splitting() const {
  switch (kind_) {
    case StructureKind::cube:
    case StructureKind::dyadic_interval_pow: return 1 << d_;
    default: return 3;
  }
}

int FractalStructure::kappa() const {
  switch (kind_) {
    case StructureKind::cube: return static_cast<int>(pow3(d_));
    case StructureKind::gasket: return kGasketKappa;
    default: return 3;
  }
}

Coords FractalStructure::cube_coords(Cell c) const {
  Coords k{};
  const Index m = mask(c.level);
  for (int i = 0; i < d_; ++i) k[i] = (c.index >> (c.level * i)) & m;
  return k;
}

Cell FractalStructure::cube_cell(int n, const Coords& k) const {
  Index idx = 0;
  for (int i = 0; i < d_; ++i) idx |= k[i] << (n * i);
  return {n, idx};
}

Cell FractalStructure::child(Cell c, int j) const {
  switch (kind_) {
    case StructureKind::cube: {
      Coords k = cube_coords(c);
      for (int i = 0; i < d_; ++i) k[i] = 2 * k[i] + ((j >> i) & 1);
      return cube_cell(c.level + 1, k);
    }
    case StructureKind::dyadic_interval_pow:
      return {c.level + 1, (c.index << d_) | static_cast<Index>(j)};
    default: return {c.level + 1, 3 * c.index + static_cast<Index>(j)};
  }
}

std::vector<Cell> FractalStructure::children(Cell c) const {
  check_level(c.level + 1);
  std::vector<Cell> out;
  const int k = splitting();
  out.reserve(k);
  for (int j = 0; j < k; ++j) out.push_back(child(c, j));
  return out;
}

Cell FractalStructure::parent(Cell c) const {
  if (c.level == 0) throw LevelError("level-0 cell has no parent");
  return ancestor(c, c.level - 1);
}

Cell FractalStructure::ancestor(Cell c, int level) const {
  if (level > c.level || level < 0) throw LevelError("ancestor level out of range");
  const int up = c.level - level;
  switch (kind_) {
    case StructureKind::cube: {
      Coords k = cube_coords(c);
      for (int i = 0; i < d_; ++i) k[i] >>= up;
      return cube_cell(level, k);
    }
    case StructureKind::dyadic_interval_pow: return {level, c.index >> (up * d_)};
    default: return {level, c.index / pow3(up)};
  }
}

std::vector<Index> FractalStructure::coords(Cell c) const {
  switch (kind_) {
    case StructureKind::cube: {
      const Coords k = cube_coords(c);
      return {k.begin(), k.begin() + d_};
    }
    case StructureKind::gasket: {
      std::vector<Index> word(c.level);
      Index w = c.index;
      for (int p = c.level - 1; p >= 0; --p) {
        word[p] = w % 3;
        w /= 3;
      }
      return word;
    }
    default: return {c.index};
  }
}

Cell FractalStructure::from_coords(int n, std::span<const Index> coords) const {
  check_level(n);
  const Index side = kind_ == StructureKind::cube ? Index{1} << n : 0;
  switch (kind_) {
    case StructureKind::cube: {
      if (static_cast<int>(coords.size()) != d_) throw std::invalid_argument("cube cell needs d coords");
      Coords k{};
      for (int i = 0; i < d_; ++i) {
        if (coords[i] >= side) throw std::invalid_argument("cube coordinate out of range");
        k[i] = coords[i];
      }
      return cube_cell(n, k);
    }
    case StructureKind::gasket: {
      if (static_cast<int>(coords.size()) != n) throw std::invalid_argument("gasket word length != level");
      Index w = 0;
      for (Index letter : coords) {
        if (letter > 2) throw std::invalid_argument("gasket letter out of range");
        w = 3 * w + letter;
      }
      return {n, w};
    }
    default:
      if (coords.size() != 1 || coords[0] >= cell_count(n)) {
        throw std::invalid_argument("interval index out of range");
      }
      return {n, coords[0]};
  }
}

std::array<Index, 2> FractalStructure::gasket_origin(Cell c) const {
  std::array<Index, 2> o{0, 0};
  Index w = c.index;
  for (int p = 0; p < c.level; ++p) {
    const Index letter = w % 3;
    w /= 3;
    if (letter == 1) o[0] |= Index{1} << p;
    if (letter == 2) o[1] |= Index{1} << p;
  }
  return o;
}

Eigen::MatrixXd FractalStructure::corners(Cell c) const {
  switch (kind_) {
    case StructureKind::cube: {
      const Coords k = cube_coords(c);
      const int count = 1 << d_;
      Eigen::MatrixXd v(d_, count);
      for (int j = 0; j < count; ++j) {
        for (int i = 0; i < d_; ++i) {
          v(i, j) = std::ldexp(static_cast<double>(k[i] + ((j >> i) & 1)), -c.level);
        }
      }
      return v;
    }
    case StructureKind::gasket: {
      const auto o = gasket_origin(c);
      const double h = std::ldexp(1.0, -c.level);
      const double x = std::ldexp(static_cast<double>(o[0]), -c.level);
      const double y = std::ldexp(static_cast<double>(o[1]), -c.level);
      Eigen::MatrixXd v(2, 3);
      v << x, x + h, x, y, y, y + h;
      return v;
    }
    default: {
      const double m = static_cast<double>(cell_count(c.level));
      Eigen::MatrixXd v(1, 2);
      v << static_cast<double>(c.index) / m, static_cast<double>(c.index + 1) / m;
      return v;
    }
  }
}

Point FractalStructure::center(Cell c) const {
  const Eigen::MatrixXd v = corners(c);
  return v.rowwise().mean();
}

bool FractalStructure::contains(Cell c, const Point& p) const {
  if (p.size() != ambient_dim()) return false;
  switch (kind_) {
    case StructureKind::cube: {
      const Coords k = cube_coords(c);
      for (int i = 0; i < d_; ++i) {
        const double t = std::ldexp(p[i], c.level);
        if (t < static_cast<double>(k[i]) || t > static_cast<double>(k[i] + 1)) return false;
      }
      return true;
    }
    case StructureKind::gasket: {
      const auto o = gasket_origin(c);
      const double u = std::ldexp(p[0], c.level) - static_cast<double>(o[0]);
      const double v = std::ldexp(p[1], c.level) - static_cast<double>(o[1]);
      return u >= 0.0 && v >= 0.0 && u + v <= 1.0;
    }
    default: {
      const double t = p[0] * static_cast<double>(cell_count(c.level));
      return t >= static_cast<double>(c.index) && t <= static_cast<double>(c.index + 1);
    }
  }
}

bool FractalStructure::contains(Cell outer, Cell inner) const {
  if (inner.level < outer.level) return false;
  const int up = inner.level - outer.level;
  switch (kind_) {
    case StructureKind::cube: {
      const Coords ko = cube_coords(outer);
      const Coords ki = cube_coords(inner);
      for (int i = 0; i < d_; ++i) {
        if (ki[i] < (ko[i] << up) || ki[i] + 1 > ((ko[i] + 1) << up)) return false;
      }
      return true;
    }
    case StructureKind::gasket: {
      const auto oo = gasket_origin(outer);
      const auto oi = gasket_origin(inner);
      const auto size = static_cast<std::int64_t>(Index{1} << up);
      const auto ox = static_cast<std::int64_t>(oo[0] << up);
      const auto oy = static_cast<std::int64_t>(oo[1] << up);
      const std::array<std::array<std::int64_t, 2>, 3> vs{{
          {static_cast<std::int64_t>(oi[0]), static_cast<std::int64_t>(oi[1])},
          {static_cast<std::int64_t>(oi[0]) + 1, static_cast<std::int64_t>(oi[1])},
          {static_cast<std::int64_t>(oi[0]), static_cast<std::int64_t>(oi[1]) + 1},
      }};
      return std::all_of(vs.begin(), vs.end(), [&](const auto& v) {
        const std::int64_t u = v[0] - ox;
        const std::int64_t w = v[1] - oy;
        return u >= 0 && w >= 0 && u + w <= size;
      });
    }
    default: {
      const Index scale = cell_count(up) == 0 ? 1 : cell_count(up);
      return inner.index >= outer.index * scale && inner.index + 1 <= (outer.index + 1) * scale;
    }
  }
}

bool FractalStructure::intersects(Cell a, Cell b) const {
  if (a.level != b.level) {
    throw LevelError("intersects expects cells of the same level");
  }
  switch (kind_) {
    case StructureKind::cube: {
      const Coords ka = cube_coords(a);
      const Coords kb = cube_coords(b);
      for (int i = 0; i < d_; ++i) {
        if ((ka[i] > kb[i] ? ka[i] - kb[i] : kb[i] - ka[i]) > 1) return false;
      }
      return true;
    }
    case StructureKind::gasket: {
      // Same-level gasket triangles share the lattice and orientation, so
      // closed triangles meet exactly when they share a vertex.
      const auto oa = gasket_origin(a);
      const auto ob = gasket_origin(b);
      const std::array<std::array<Index, 2>, 3> va{{{oa[0], oa[1]}, {oa[0] + 1, oa[1]}, {oa[0], oa[1] + 1}}};
      const std::array<std::array<Index, 2>, 3> vb{{{ob[0], ob[1]}, {ob[0] + 1, ob[1]}, {ob[0], ob[1] + 1}}};
      for (const auto& p : va) {
        for (const auto& q : vb) {
          if (p == q) return true;
        }
      }
      return false;
    }
    default: return (a.index > b.index ? a.index - b.index : b.index - a.index) <= 1;
  }
}

double FractalStructure::distance(Cell c, const Point& p) const {
  switch (kind_) {
    case StructureKind::gasket: {
      if (contains(c, p)) return 0.0;
      const Eigen::MatrixXd v = corners(c);
      const Eigen::Vector2d q = p;
      const Eigen::Vector2d a = v.col(0), b = v.col(1), e = v.col(2);
      const double best = std::min({point_segment_distance_sq(q, a, b), point_segment_distance_sq(q, b, e),
                                    point_segment_distance_sq(q, e, a)});
      return std::sqrt(best);
    }
    default: {
      const Eigen::MatrixXd v = corners(c);
      const Eigen::VectorXd lo = v.rowwise().minCoeff();
      const Eigen::VectorXd hi = v.rowwise().maxCoeff();
      double s = 0.0;
      for (Eigen::Index i = 0; i < p.size(); ++i) s += sq(std::max({lo[i] - p[i], 0.0, p[i] - hi[i]}));
      return std::sqrt(s);
    }
  }
}

namespace {

bool in_unit_box(const Point& p) {
  return (p.array() >= 0.0).all() && (p.array() <= 1.0).all();
}

}  // namespace

std::vector<Cell> star(const FractalStructure& fs, const Point& p, int n) {
  if (p.size() != fs.ambient_dim() || !in_unit_box(p)) {
    throw CarrierError("point outside the carrier of " + fs.name());
  }
  std::vector<Cell> out;
  switch (fs.kind()) {
    case StructureKind::cube: {
      const int d = fs.dim();
      const Index side = Index{1} << n;
      std::vector<std::vector<Index>> axes(d);
      for (int i = 0; i < d; ++i) axis_candidates(std::ldexp(p[i], n), side, axes[i]);
      std::vector<std::size_t> pos(d, 0);
      while (true) {
        Coords k{};
        for (int i = 0; i < d; ++i) k[i] = axes[i][pos[i]];
        out.push_back(fs.cube_cell(n, k));
        int i = 0;
        while (i < d && ++pos[i] == axes[i].size()) pos[i++] = 0;
        if (i == d) break;
      }
      break;
    }
    case StructureKind::gasket: {
      std::vector<Cell> frontier{{0, 0}};
      if (p[0] + p[1] > 1.0) frontier.clear();
      for (int level = 0; level < n && !frontier.empty(); ++level) {
        std::vector<Cell> next;
        for (Cell c : frontier) {
          for (int j = 0; j < 3; ++j) {
            const Cell ch = fs.child(c, j);
            if (fs.contains(ch, p)) next.push_back(ch);
          }
        }
        frontier = std::move(next);
      }
      out = std::move(frontier);
      if (out.empty()) throw CarrierError("point outside the gasket");
      break;
    }
    default: {
      const Index m = fs.cell_count(n);
      std::vector<Index> ks;
      axis_candidates(p[0] * static_cast<double>(m), m, ks);
      for (Index k : ks) out.push_back({n, k});
      break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Cell lowest_cell_containing(const FractalStructure& fs, const Point& p, int n) {
  return star(fs, p, n).front();
}

namespace {

double distance_sq_box(const FractalStructure& fs, Cell c, const Point& p) {
  const Eigen::MatrixXd v = fs.corners(c);
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double lo = v.row(i).minCoeff();
    const double hi = v.row(i).maxCoeff();
    s += sq(std::max({lo - p[i], 0.0, p[i] - hi}));
  }
  return s;
}

}  // namespace

std::vector<Cell> cells_meeting_ball(const FractalStructure& fs, const Point& center, double radius, int n) {
  std::vector<Cell> out;
  const double r2 = radius * radius;
  switch (fs.kind()) {
    case StructureKind::gasket: {
      std::vector<Cell> frontier{{0, 0}};
      for (int level = 0; level < n; ++level) {
        std::vector<Cell> next;
        for (Cell c : frontier) {
          for (int j = 0; j < 3; ++j) {
            const Cell ch = fs.child(c, j);
            if (sq(fs.distance(ch, center)) <= r2 || fs.contains(ch, center)) next.push_back(ch);
          }
        }
        frontier = std::move(next);
      }
      out = std::move(frontier);
      break;
    }
    default: {
      const int axes = fs.ambient_dim();
      const bool cube = fs.kind() == StructureKind::cube;
      const Index side = cube ? Index{1} << n : fs.cell_count(n);
      const double scale = static_cast<double>(side);
      std::array<Index, kMaxDim> lo{}, hi{};
      for (int i = 0; i < axes; ++i) {
        const double a = std::floor((center[i] - radius) * scale) - 1.0;
        const double b = std::floor((center[i] + radius) * scale) + 1.0;
        lo[i] = a <= 0.0 ? 0 : static_cast<Index>(a);
        hi[i] = b >= scale - 1.0 ? side - 1 : static_cast<Index>(b);
        if (b < 0.0 || a > scale - 1.0) return out;
      }
      Coords k = lo;
      while (true) {
        const Cell c = cube ? fs.cube_cell(n, k) : Cell{n, k[0]};
        if (distance_sq_box(fs, c, center) <= r2) out.push_back(c);
        int i = 0;
        while (i < axes && k[i] == hi[i]) k[i] = lo[i], ++i;
        if (i == axes) break;
        ++k[i];
      }
      break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Probe> builtin_probe_suite(const FractalStructure& fs, int n, int random_points, std::uint64_t seed) {
  std::vector<Probe> probes;
  const double radius = fs.diam(n) / 2.0;

  // Grid vertices.
  if (fs.kind() == StructureKind::gasket) {
    std::set<std::pair<double, double>> seen;
    for (Cell c : fs.level_cells(n)) {
      const Eigen::MatrixXd v = fs.corners(c);
      for (int j = 0; j < 3; ++j) {
        if (seen.emplace(v(0, j), v(1, j)).second) probes.push_back({v.col(j), radius});
      }
    }
  } else {
    const int axes = fs.ambient_dim();
    const Index side = fs.kind() == StructureKind::cube ? Index{1} << n : fs.cell_count(n);
    Coords k{};
    while (true) {
      Point p(axes);
      for (int i = 0; i < axes; ++i) p[i] = static_cast<double>(k[i]) / static_cast<double>(side);
      probes.push_back({p, radius});
      int i = 0;
      while (i < axes && k[i] == side) k[i++] = 0;
      if (i == axes) break;
      ++k[i];
    }
  }

  for (Cell c : fs.level_cells(n)) probes.push_back({fs.center(c), radius});

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int r = 0; r < random_points; ++r) {
    Point p(fs.ambient_dim());
    if (fs.kind() == StructureKind::gasket) {
      double u = unit(rng), v = unit(rng);
      if (u + v > 1.0) u = 1.0 - u, v = 1.0 - v;
      p << u, v;
    } else {
      for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = unit(rng);
    }
    probes.push_back({p, radius});
  }
  return probes;
}

KappaReport check_kappa(const FractalStructure& fs, int n, std::span<const Probe> probes) {
  KappaReport report;
  for (const Probe& probe : probes) {
    const int count = static_cast<int>(cells_meeting_ball(fs, probe.center, probe.radius, n).size());
    if (count > report.max_count) {
      report.max_count = count;
      report.witness = probe;
    }
  }
  return report;
}

}  // namespace fdr
