#pragma once

#include <cstdint>
#include <vector>

#include "gcube/schema.hpp"

namespace gcube {

class Record;

// Deepest usable resolution. A continuous value is normalized through a
// double, whose 53-bit significand is exhausted at this depth: two stored
// fractions that agree in their first 53 bits are bitwise equal, so records
// whose fractions match in every dimension are equal keys by definition.
inline constexpr int k_max_resolution = 53;

// Number of bits in the fixed-point key fraction.
inline constexpr int key_fraction_bits = 53;

// Map a raw coordinate onto the unit interval [0, 1).
//   categorical: id / 2^ceil(log2(cardinality))   (cardinality 1 -> 0)
//   continuous:  (value - lo) / (hi - lo), with value == hi clamped to the
//                largest double strictly below 1
// Throws DomainError (naming the dimension) if the value is outside the
// declared domain.
double normalize(const DimensionSpec& spec, double value);

// The same embedding as a 53-bit fixed-point integer in [0, 2^53). This is
// the canonical key form: cell coordinates at any resolution k are its top
// k bits, so refinement and key equality are exact integer statements.
std::uint64_t key_fraction(const DimensionSpec& spec, double value);

// Top k bits of a key fraction: the grid cell index along one dimension at
// resolution k. Requires 1 <= k <= k_max_resolution.
std::uint64_t cell_coord(std::uint64_t frac, int k);

// Grid cell of a record at resolution k, one coordinate per dimension,
// each in [0, 2^k).
std::vector<std::uint64_t> cell_coords(const Record& record, const Schema& schema, int k);

// Starting resolution of the adaptive sort: ceil(log2 max cardinality) over
// the categorical dimensions, floored at 1. All-continuous schemas start
// at 1 and rely on adaptation.
int initial_resolution(const Schema& schema);

}  // namespace gcube
