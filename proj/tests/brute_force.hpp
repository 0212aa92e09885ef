#pragma once

// Exhaustive enumeration of mixed-level covers, the reference for the cover DP.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fdr/sets.hpp"

namespace fdr::testing {

// Every cover of the digitized set by intersecting cells of levels n..depth
// that is an antichain, listed explicitly.
inline std::vector<std::vector<Cell>> antichain_covers(const RegionOracle& o, Cell a, int depth) {
  std::vector<std::vector<Cell>> out{{a}};
  if (a.level == depth) return out;
  std::vector<std::vector<Cell>> partial{{}};
  for (Cell k : o.structure().children(a)) {
    if (!o.intersects(k)) continue;
    const auto sub = antichain_covers(o, k, depth);
    std::vector<std::vector<Cell>> grown;
    for (const auto& p : partial) {
      for (const auto& s : sub) {
        auto c = p;
        c.insert(c.end(), s.begin(), s.end());
        grown.push_back(std::move(c));
      }
    }
    partial = std::move(grown);
  }
  out.insert(out.end(), partial.begin(), partial.end());
  return out;
}

inline bool covers_digitized(const RegionOracle& o, const std::vector<Cell>& cover, const CellCover& finest) {
  const auto& fs = o.structure();
  for (Index c : finest.cells) {
    bool hit = false;
    for (Cell a : cover) hit = hit || fs.ancestor({finest.level, c}, a.level) == a;
    if (!hit) return false;
  }
  return true;
}

// Every antichain cover of the digitized set by cells of levels n..depth,
// each checked to cover the finest level.
inline std::vector<std::vector<Cell>> all_covers(const RegionOracle& o, int n, int depth) {
  const auto& fs = o.structure();
  std::vector<std::vector<Cell>> all{{}};
  for (Index c : digitize(o, fs, n).cells) {
    const auto sub = antichain_covers(o, {n, c}, depth);
    std::vector<std::vector<Cell>> grown;
    for (const auto& p : all) {
      for (const auto& q : sub) {
        auto v = p;
        v.insert(v.end(), q.begin(), q.end());
        grown.push_back(std::move(v));
      }
    }
    all = std::move(grown);
  }
  const auto finest = digitize(o, fs, depth);
  for (const auto& cover : all) {
    if (!covers_digitized(o, cover, finest)) throw std::logic_error("enumerated set is not a cover");
  }
  return all;
}

inline double cheapest(const FractalStructure& fs, const std::vector<std::vector<Cell>>& covers, double s) {
  double best = INFINITY;
  for (const auto& cover : covers) {
    double sum = 0.0;
    for (Cell a : cover) sum += std::pow(fs.diam(a.level), s);
    best = std::min(best, sum);
  }
  return best;
}

}  // namespace fdr::testing
