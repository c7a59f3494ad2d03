#pragma once

#include <vector>

#include "gcube/record.hpp"
#include "gcube/schema.hpp"

namespace gcube {

// The pre-discretization baseline: fix one grid resolution for the whole
// dataset up front, materialize every rank at that resolution, and sort.
// Needs the full dataset before it can pick the resolution, which is the
// weakness the adaptive path avoids.

// Smallest k at which all distinct-key records occupy distinct grid cells,
// located by doubling from the initial resolution and binary-searching the
// bracket. Throws if even the deepest grid cannot separate them (possible
// only with duplicate keys filtered out beforehand, so effectively a
// corruption guard).
int required_static_resolution(const std::vector<Record>& records, const Schema& schema);

// Materialize every record's rank at k_s and stable-sort by it. Output
// order matches hilbert_sort on any dataset where both succeed. Throws if
// two distinct-key records collide at k_s (precondition violation).
std::vector<Record> prediscretize_sort(std::vector<Record> records, const Schema& schema, int k_s);

}  // namespace gcube
