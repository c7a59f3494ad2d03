#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gcube/block_store.hpp"
#include "gcube/index_tree.hpp"

namespace gcube {

// Axis-aligned query region: an optional closed interval per dimension, in
// original coordinate space. An absent interval leaves that dimension
// unconstrained. Membership is tested on raw values, so the grid
// resolution never affects query answers.
struct QueryRegion {
    std::vector<std::optional<Interval>> dims;

    static QueryRegion unconstrained(std::size_t dim_count);
    void validate(const Schema& schema) const;
    bool contains(const Record& record) const;
};

enum class AggregateFn { count, sum, avg, min, max, median };

AggregateFn aggregate_fn_from_name(const std::string& name);
std::string aggregate_fn_name(AggregateFn fn);

struct AggregateRequest {
    AggregateFn fn = AggregateFn::count;
    std::string measure;  // absent (empty) for COUNT
};

struct QueryResult {
    std::optional<double> value;         // SUM/AVG/MIN/MAX/MEDIAN
    std::optional<std::uint64_t> count;  // COUNT
    bool empty_region = false;           // set iff zero records matched
    std::uint64_t nodes_visited = 0;
    std::uint64_t blocks_read = 0;
};

// Breadth-first traversal with pre-aggregate short-circuiting: nodes whose
// box is disjoint from the region are skipped, fully covered nodes
// contribute their stored aggregate without being descended, and partially
// overlapping leaf-level blocks are scanned record by record. Block reads
// happen in ascending block order. Handles COUNT/SUM/AVG/MIN/MAX; MEDIAN is
// holistic and must go through range_median.
QueryResult range_aggregate(const IndexTree& index, const BlockFile& blocks,
                            const QueryRegion& region, const AggregateRequest& request);

// Stream every record inside the region, in Hilbert (stored) order.
void range_retrieve(const IndexTree& index, const BlockFile& blocks, const QueryRegion& region,
                    const std::function<void(const Record&)>& emit, QueryResult* stats = nullptr);
std::vector<Record> range_retrieve(const IndexTree& index, const BlockFile& blocks,
                                   const QueryRegion& region);

// Median of one measure over the retrieved records; even cardinality
// averages the two middle values.
QueryResult range_median(const IndexTree& index, const BlockFile& blocks,
                         const QueryRegion& region, const std::string& measure);

// Independent oracle: one linear scan over raw records with a per-record
// membership test and a streaming fold. Shares nothing with the index path
// beyond the Record/QueryRegion types.
QueryResult brute_force_aggregate(std::span<const Record> records, const QueryRegion& region,
                                  const AggregateRequest& request, const Schema& schema);

// ---------------------------------------------------------------------------
// Query documents (the CLI wire format).
//
//   {"region": {"dim": [lo, hi], "other": {"in": [2, 5, 9]}, ...},
//    "aggregate": {"fn": "sum", "measure": "sales"}}
//
// Set predicates are allowed on categorical dimensions only; they are
// decomposed into a union of disjoint interval queries whose results are
// combined additively (COUNT/SUM), by min/max merge (MIN/MAX), from total
// sum and count (AVG), or by merging retrieved records (MEDIAN).

struct QueryDocument {
    struct Predicate {
        std::optional<Interval> interval;
        std::vector<double> in_set;  // non-empty for a set predicate
    };
    std::vector<Predicate> dims;  // aligned with schema dimensions
    AggregateRequest request;
};

QueryDocument parse_query_document(const std::string& json_text, const Schema& schema);
QueryResult run_query_document(const IndexTree& index, const BlockFile& blocks,
                               const QueryDocument& doc);
std::string render_result_json(const QueryDocument& doc, const QueryResult& result,
                               const Schema& schema);

}  // namespace gcube
