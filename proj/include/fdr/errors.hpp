#pragma once

#include <stdexcept>
#include <string>

namespace fdr {

/// A requested level does not fit in the 64-bit cell address.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// A point lies outside the carrier of a fractal structure.
class CarrierError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A level is not available (uncached curve level, mismatched cover level).
class LevelError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Inputs that cannot produce a meaningful numeric answer
/// (flat regressions, missing sign change, non-contractive maps, ...).
class DegenerateInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An oracle reported an intersecting cell none of whose children intersect.
class NonMonotoneOracle : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Two objects were combined over incompatible fractal structures.
class StructureMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace fdr
