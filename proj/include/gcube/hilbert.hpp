#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gcube/rank.hpp"
#include "gcube/record.hpp"
#include "gcube/schema.hpp"

namespace gcube {

// Rank of a grid cell on the order-k Hilbert curve over a d-dimensional
// grid of side 2^k. Bijection between cells and [0, 2^(d*k)); the all-zero
// cell has rank 0. Throws DomainError if a coordinate is >= 2^k.
RankInt hilbert_rank(std::span<const std::uint64_t> cells, int k);

// Inverse mapping: the grid cell visited at position `rank` on the curve.
std::vector<std::uint64_t> hilbert_cells(const RankInt& rank, int k, std::size_t dims);

// Rank of a record's cell at resolution k, going through the record's
// cached (rank, resolution) pair when use_cache is set.
RankInt record_rank(const Record& record, const Schema& schema, int k, bool use_cache = true);

// Order two records along the curve, raising the shared resolution counter
// until their cells separate. Equal keys return Ordering::equal without
// touching k; otherwise k is advanced past every resolution at which the
// two records share a cell (never decreased) and the rank comparison at the
// final k decides. Both records' cached ranks are refreshed at that k.
Ordering hilbert_compare(const Record& a, const Record& b, int& k, const Schema& schema,
                         bool use_cache = true);

struct SortOptions {
    bool use_rank_cache = true;
};

// Stable in-place sort into Hilbert order under the adaptive comparator,
// starting from initial_resolution(schema). Returns the final resolution:
// a grid depth at which every distinct-key pair that the sort compared
// occupies distinct cells. Records with identical keys end up adjacent, in
// their input order.
int hilbert_sort(std::vector<Record>& records, const Schema& schema, SortOptions options = {});

}  // namespace gcube
