#pragma once

// Hilbert curve index arithmetic in any dimension d >= 2.
//
// The curve is generated top-down by reflected-Gray-code orientation states
// (entry corner e, principal direction), so the level-(n+1) curve restricted
// to the children of a level-n sub-cube is the refinement of that sub-cube
// and nesting across levels holds by construction. The initial state is
// chosen so the level-1 order is the Gray code itself with bit j driving
// axis j: for d = 2 that is (0,0), (1,0), (1,1), (0,1).

#include "fdr/grid.hpp"

namespace fdr::hilbert {

/// Grid coordinates (level n, side 2^n) of the cube visited at position h.
Coords coords_of(int d, int n, Index h);

/// Inverse of coords_of.
Index index_of(int d, int n, const Coords& k);

}  // namespace fdr::hilbert
