#include "fdr/curve.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "fdr/hilbert.hpp"

namespace fdr {

LevelMap LevelMap::from_forward(int level, std::vector<Index> forward, Index range_count) {
  LevelMap map;
  map.level = level;
  map.offsets.assign(range_count + 1, 0);
  for (Index b : forward) {
    if (b >= range_count) throw std::invalid_argument("level map image out of range");
    ++map.offsets[b + 1];
  }
  for (Index b = 0; b < range_count; ++b) map.offsets[b + 1] += map.offsets[b];
  map.preimages.resize(forward.size());
  std::vector<std::size_t> fill(map.offsets.begin(), map.offsets.end() - 1);
  for (Index a = 0; a < forward.size(); ++a) map.preimages[fill[forward[a]]++] = a;
  map.forward = std::move(forward);
  return map;
}

CurveFamily::CurveFamily(std::string name, FractalStructure domain, FractalStructure range, IndexRule forward,
                         IndexRule inverse, CurveConstants constants)
    : name_(std::move(name)),
      domain_(domain),
      range_(range),
      forward_(std::move(forward)),
      inverse_(std::move(inverse)),
      constants_(constants) {
  if (domain_.kind() != StructureKind::dyadic_interval_pow && domain_.kind() != StructureKind::triadic_interval) {
    throw StructureMismatch("curve domain must be an interval structure");
  }
}

CurveFamily CurveFamily::from_level_maps(std::string name, FractalStructure domain, FractalStructure range,
                                         std::vector<LevelMap> maps, CurveConstants constants) {
  for (std::size_t n = 0; n < maps.size(); ++n) {
    const int level = static_cast<int>(n);
    if (maps[n].level != level || maps[n].forward.size() != domain.cell_count(level) ||
        maps[n].offsets.size() != range.cell_count(level) + 1) {
      throw std::invalid_argument("level map " + std::to_string(n) + " does not match the structures");
    }
  }
  CurveFamily cf(std::move(name), domain, range, nullptr, nullptr, constants);
  cf.maps_ = std::move(maps);
  return cf;
}

void CurveFamily::extend(int depth) {
  for (int n = cached_depth() + 1; n <= depth; ++n) {
    if (!forward_) {
      throw LevelError(name_ + ": level " + std::to_string(n) + " has no table and the family has no rule");
    }
    const Index count = domain_.cell_count(n);
    range_.cell_count(n);
    std::vector<Index> forward(count);
    for (Index a = 0; a < count; ++a) forward[a] = forward_(n, a);
    maps_.push_back(LevelMap::from_forward(n, std::move(forward), range_.cell_count(n)));
  }
}

const LevelMap& CurveFamily::level_map(int n) const {
  if (n < 0 || n > cached_depth()) {
    throw LevelError(name_ + ": level " + std::to_string(n) + " is not cached (cached depth " +
                     std::to_string(cached_depth()) + ")");
  }
  return maps_[n];
}

Cell CurveFamily::image_cell(Cell a) const { return {a.level, level_map(a.level).forward.at(a.index)}; }

std::vector<Cell> CurveFamily::preimage_cells(Cell b) const {
  const LevelMap& map = level_map(b.level);
  if (b.index >= map.offsets.size() - 1) throw std::out_of_range("range cell out of range");
  std::vector<Cell> out;
  for (Index a : map.preimages_of(b.index)) out.push_back({b.level, a});
  return out;
}

Index CurveFamily::forward_index(int n, Index a) const {
  if (forward_) {
    if (a >= domain_.cell_count(n)) throw std::out_of_range("domain cell out of range");
    return forward_(n, a);
  }
  return level_map(n).forward.at(a);
}

std::optional<Index> CurveFamily::first_preimage(int n, Index b) const {
  if (inverse_) {
    if (b >= range_.cell_count(n)) throw std::out_of_range("range cell out of range");
    return inverse_(n, b);
  }
  const auto pre = level_map(n).preimages_of(b);
  if (pre.empty()) return std::nullopt;
  return *std::min_element(pre.begin(), pre.end());
}

CurveFamily hilbert_family(int d) {
  if (d < 2) throw std::invalid_argument("Hilbert family needs d >= 2");
  const FractalStructure domain = FractalStructure::dyadic_interval_pow(d);
  const FractalStructure range = FractalStructure::cube(d);
  auto forward = [d, range](int n, Index a) { return range.cube_cell(n, hilbert::coords_of(d, n, a)).index; };
  auto inverse = [d, range](int n, Index b) { return hilbert::index_of(d, n, range.cube_coords({n, b})); };
  const double dd = static_cast<double>(d);
  return {"hilbert" + std::to_string(d), domain, range, forward, inverse,
          CurveConstants{std::pow(dd, dd / 2.0), dd}};
}

namespace {

// Traversal of a gasket triangle entered at corner `entry` and left at corner
// `exit`: the sub-triangle at the entry corner, then the one at the free
// corner, then the one at the exit corner. Consecutive sub-triangles share
// the midpoint between their corners.
struct GasketState {
  int entry = 0;
  int exit = 1;

  int free_corner() const { return 3 - entry - exit; }
  std::array<int, 3> order() const { return {entry, free_corner(), exit}; }
  GasketState child_state(int position) const {
    switch (position) {
      case 0: return {entry, free_corner()};
      case 1: return {entry, exit};
      default: return {free_corner(), exit};
    }
  }
};

Index pow3(int n) {
  Index r = 1;
  for (int i = 0; i < n; ++i) r *= 3;
  return r;
}

}  // namespace

CurveFamily gasket_family() {
  auto forward = [](int n, Index t) {
    GasketState s;
    Index word = 0;
    for (Index div = n > 0 ? pow3(n - 1) : 0; div > 0; div /= 3) {
      const int pos = static_cast<int>((t / div) % 3);
      word = 3 * word + static_cast<Index>(s.order()[pos]);
      s = s.child_state(pos);
    }
    return word;
  };
  auto inverse = [](int n, Index w) {
    GasketState s;
    Index t = 0;
    for (Index div = n > 0 ? pow3(n - 1) : 0; div > 0; div /= 3) {
      const int letter = static_cast<int>((w / div) % 3);
      const auto order = s.order();
      const int pos = static_cast<int>(std::find(order.begin(), order.end(), letter) - order.begin());
      t = 3 * t + static_cast<Index>(pos);
      s = s.child_state(pos);
    }
    return t;
  };
  const double exponent = std::log(3.0) / std::log(2.0);
  return {"gasket",
          FractalStructure::triadic_interval(),
          FractalStructure::gasket(),
          forward,
          inverse,
          CurveConstants{std::pow(std::sqrt(2.0), exponent), exponent}};
}

CurveFamily swap_images(const CurveFamily& cf, int depth, int level, Index a, Index b) {
  if (level > depth) throw LevelError("swap level beyond depth");
  std::vector<LevelMap> maps;
  for (int n = 0; n <= depth; ++n) {
    const Index count = cf.domain().cell_count(n);
    std::vector<Index> forward(count);
    for (Index i = 0; i < count; ++i) forward[i] = cf.forward_index(n, i);
    if (n == level) std::swap(forward.at(a), forward.at(b));
    maps.push_back(LevelMap::from_forward(n, std::move(forward), cf.range().cell_count(n)));
  }
  return CurveFamily::from_level_maps(cf.name() + "-swapped", cf.domain(), cf.range(), std::move(maps),
                                      cf.constants());
}

bool VerificationReport::passed() const {
  return std::all_of(conditions.begin(), conditions.end(), [](const auto& c) { return c.passed; });
}

const ConditionResult& VerificationReport::operator[](const std::string& condition) const {
  for (const auto& c : conditions) {
    if (c.condition == condition) return c;
  }
  throw std::out_of_range("no condition " + condition);
}

namespace {

std::string describe(const FractalStructure& fs, Cell c) {
  std::ostringstream os;
  os << fs.name() << "@" << c.level << "[";
  const auto k = fs.coords(c);
  for (std::size_t i = 0; i < k.size(); ++i) os << (i ? "," : "") << k[i];
  os << "]";
  return os.str();
}

}  // namespace

VerificationReport verify_conditions(CurveFamily& cf, int depth) {
  cf.extend(depth);
  const FractalStructure& dom = cf.domain();
  const FractalStructure& ran = cf.range();

  ConditionResult adjacency, nesting, onto, unions;
  adjacency.condition = "i";
  nesting.condition = "ii";
  onto.condition = "iii";
  unions.condition = "iv";

  for (int n = 0; n <= depth; ++n) {
    const LevelMap& map = cf.level_map(n);
    const Index count = map.forward.size();

    // (i) intervals meet only when consecutive.
    for (Index a = 0; a + 1 < count && adjacency.passed; ++a) {
      const Cell ia{n, map.forward[a]}, ib{n, map.forward[a + 1]};
      if (!ran.intersects(ia, ib)) {
        adjacency.passed = false;
        adjacency.level = n;
        adjacency.witness = {{n, a}, {n, a + 1}, ia, ib};
        adjacency.detail = describe(dom, {n, a}) + " meets " + describe(dom, {n, a + 1}) + " but " +
                           describe(ran, ia) + " and " + describe(ran, ib) + " are disjoint";
      }
    }

    // (iii)
    for (Index b = 0; b + 1 < map.offsets.size() && onto.passed; ++b) {
      if (map.offsets[b] == map.offsets[b + 1]) {
        onto.passed = false;
        onto.level = n;
        onto.witness = {{n, b}};
        onto.detail = describe(ran, {n, b}) + " has no preimage";
      }
    }

    if (n == 0) continue;
    const LevelMap& coarse = cf.level_map(n - 1);

    // (ii)
    for (Index a = 0; a < count && nesting.passed; ++a) {
      const Cell child{n, a};
      const Cell parent = dom.parent(child);
      const Cell outer{n - 1, coarse.forward[parent.index]};
      const Cell inner{n, map.forward[a]};
      if (!ran.contains(outer, inner)) {
        nesting.passed = false;
        nesting.level = n;
        nesting.witness = {child, parent, inner, outer};
        nesting.detail = describe(ran, inner) + " is not inside " + describe(ran, outer);
      }
    }

    // (iv) on integer addresses: the child images are exactly the children
    // of the parent image.
    for (Index p = 0; p < coarse.forward.size() && unions.passed; ++p) {
      const Cell parent{n - 1, p};
      std::vector<Index> images;
      for (const Cell& ch : dom.children(parent)) images.push_back(map.forward[ch.index]);
      std::vector<Index> expected;
      for (const Cell& ch : ran.children({n - 1, coarse.forward[p]})) expected.push_back(ch.index);
      std::sort(images.begin(), images.end());
      std::sort(expected.begin(), expected.end());
      if (images != expected) {
        unions.passed = false;
        unions.level = n - 1;
        unions.witness = {parent, {n - 1, coarse.forward[p]}};
        unions.detail = "children of " + describe(dom, parent) + " do not tile " +
                        describe(ran, {n - 1, coarse.forward[p]});
      }
    }
  }
  return {depth, {adjacency, nesting, onto, unions}};
}

Point eval_point(const CurveFamily& cf, double x, int depth) {
  Point p(1);
  p << x;
  const Cell a = lowest_cell_containing(cf.domain(), p, depth);
  return cf.range().center({depth, cf.forward_index(depth, a.index)});
}

double quasi_inverse(const CurveFamily& cf, const Point& y, int depth) {
  const Cell b = lowest_cell_containing(cf.range(), y, depth);
  const auto a = cf.first_preimage(depth, b.index);
  if (!a) throw CarrierError("range cell has no preimage at level " + std::to_string(depth));
  if (cf.domain().kind() == StructureKind::dyadic_interval_pow) {
    return std::ldexp(static_cast<double>(*a), -depth * cf.domain().dim());
  }
  return static_cast<double>(*a) / static_cast<double>(cf.domain().cell_count(depth));
}

double realized_diameter(const FractalStructure& fs, Cell c) {
  const Eigen::MatrixXd v = fs.corners(c);
  double best = 0.0;
  for (Eigen::Index i = 0; i < v.cols(); ++i) {
    for (Eigen::Index j = i + 1; j < v.cols(); ++j) best = std::max(best, (v.col(i) - v.col(j)).norm());
  }
  return best;
}

MainHypothesesFit verify_main_hypotheses(const CurveFamily& cf, int depth) {
  if (depth < 2) throw DegenerateInput("main-hypotheses fit needs depth >= 2");

  auto level_sup = [&](const FractalStructure& fs, int n, bool image) {
    double sup = 0.0;
    for (Index a = 0; a < cf.domain().cell_count(n); ++a) {
      const Cell c = image ? Cell{n, cf.forward_index(n, a)} : Cell{n, a};
      sup = std::max(sup, realized_diameter(fs, c));
    }
    return sup;
  };
  const double a1 = level_sup(cf.domain(), 1, false), a2 = level_sup(cf.domain(), 2, false);
  const double b1 = level_sup(cf.range(), 1, true), b2 = level_sup(cf.range(), 2, true);
  if (b1 == b2 || a1 == a2) throw DegenerateInput("diameters do not shrink between levels 1 and 2");

  MainHypothesesFit fit;
  fit.exponent = std::log(a1 / a2) / std::log(b1 / b2);
  fit.c = std::pow(b1, fit.exponent) / a1;
  for (int n = 0; n <= depth; ++n) {
    for (Index a = 0; a < cf.domain().cell_count(n); ++a) {
      const double da = realized_diameter(cf.domain(), {n, a});
      const double db = realized_diameter(cf.range(), {n, cf.forward_index(n, a)});
      const double target = fit.c * da;
      fit.max_residual = std::max(fit.max_residual, std::abs(std::pow(db, fit.exponent) - target) / target);
    }
  }
  return fit;
}

std::vector<Point> curve_polyline(const CurveFamily& cf, int n) {
  const Index count = cf.domain().cell_count(n);
  std::vector<Point> out;
  out.reserve(count);
  for (Index a = 0; a < count; ++a) out.push_back(cf.range().center({n, cf.forward_index(n, a)}));
  return out;
}

}  // namespace fdr
