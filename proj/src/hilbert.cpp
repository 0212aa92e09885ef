#include "fdr/hilbert.hpp"

#include <bit>

namespace fdr::hilbert {

namespace {

struct State {
  Index entry = 0;
  int dir = 0;
};

Index low_mask(int d) { return (Index{1} << d) - 1; }

Index rotl(Index x, int r, int d) {
  r %= d;
  if (r == 0) return x;
  return ((x << r) | (x >> (d - r))) & low_mask(d);
}

Index rotr(Index x, int r, int d) { return rotl(x, d - (r % d), d); }

Index gray(Index i) { return i ^ (i >> 1); }

Index gray_inverse(Index g) {
  Index i = g;
  for (int shift = 1; shift < 64; shift <<= 1) i ^= i >> shift;
  return i;
}

int trailing_ones(Index i) { return std::countr_one(i); }

Index entry_corner(Index w) { return w == 0 ? 0 : gray(2 * ((w - 1) / 2)); }

int intra_direction(Index w, int d) {
  if (w == 0) return 0;
  return (w % 2 == 0 ? trailing_ones(w - 1) : trailing_ones(w)) % d;
}

void advance(State& s, Index w, int d) {
  s.entry ^= rotl(entry_corner(w), s.dir + 1, d);
  s.dir = (s.dir + intra_direction(w, d) + 1) % d;
}

}  // namespace

Coords coords_of(int d, int n, Index h) {
  Coords k{};
  State s{0, d - 1};
  for (int i = n - 1; i >= 0; --i) {
    const Index w = (h >> (i * d)) & low_mask(d);
    const Index l = rotl(gray(w), s.dir + 1, d) ^ s.entry;
    for (int j = 0; j < d; ++j) k[j] |= ((l >> j) & 1) << i;
    advance(s, w, d);
  }
  return k;
}

Index index_of(int d, int n, const Coords& k) {
  Index h = 0;
  State s{0, d - 1};
  for (int i = n - 1; i >= 0; --i) {
    Index l = 0;
    for (int j = 0; j < d; ++j) l |= ((k[j] >> i) & 1) << j;
    const Index w = gray_inverse(rotr(l ^ s.entry, s.dir + 1, d));
    advance(s, w, d);
    h = (h << d) | w;
  }
  return h;
}

}  // namespace fdr::hilbert
