#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gcube/block_store.hpp"
#include "gcube/rank.hpp"
#include "gcube/record.hpp"
#include "gcube/schema.hpp"

namespace gcube {

inline constexpr std::uint32_t index_file_version = 1;
inline constexpr std::uint32_t default_fanout = 64;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool operator==(const Interval&) const = default;
};

// Minimum bounding box in original coordinate space: integer ids for
// categorical dimensions (stored as integral doubles), reals for continuous.
struct BoundingBox {
    std::vector<Interval> dims;

    static BoundingBox around(const Record& record);
    void expand(const Record& record);
    void expand(const BoundingBox& other);
    bool operator==(const BoundingBox&) const = default;
};

struct MeasureAggregate {
    double sum = 0.0;
    double min = 0.0;
    double max = 0.0;
    bool operator==(const MeasureAggregate&) const = default;
};

// Distributive pre-aggregates: count plus sum/min/max per measure. AVERAGE
// is algebraic and derived at query time as sum/count; min/max are
// meaningless while count is zero.
struct NodeAggregate {
    std::uint64_t count = 0;
    std::vector<MeasureAggregate> measures;

    static NodeAggregate identity(std::size_t measure_count);
    void fold_record(const Record& record);
    void merge(const NodeAggregate& other);
    bool operator==(const NodeAggregate&) const = default;
};

struct IndexNode {
    std::uint32_t level = 0;
    BoundingBox box;
    NodeAggregate agg;

    // level 0: the referenced block and the rank of its first record.
    std::uint64_t block_id = 0;
    RankInt first_rank;

    // level > 0: a consecutive run of nodes one level below.
    std::uint64_t child_begin = 0;
    std::uint32_t child_count = 0;

    // Covered block range [block_lo, block_hi], derived from the children.
    std::uint64_t block_lo = 0;
    std::uint64_t block_hi = 0;
};

// Box union and aggregate merge over one node's children.
std::pair<BoundingBox, NodeAggregate> node_annotate(std::span<const IndexNode> children);

// Bottom-up bulk-loaded index: one level-0 node per block, then groups of
// up to F consecutive nodes per level until a single root remains. Built
// once over a finished block file and immutable afterwards.
class IndexTree {
public:
    static IndexTree build(const BlockFile& blocks, const Schema& schema, std::uint32_t fanout);

    bool empty() const { return levels_.empty(); }
    std::size_t height() const { return levels_.size(); }
    std::uint64_t node_count() const;
    std::vector<std::uint64_t> level_node_counts() const;

    const std::vector<IndexNode>& level(std::size_t i) const { return levels_[i]; }
    const IndexNode& root() const { return levels_.back().front(); }
    const IndexNode& child(const IndexNode& parent, std::uint32_t i) const;

    std::uint32_t fanout() const { return fanout_; }
    std::uint64_t record_count() const { return record_count_; }
    int resolution() const { return resolution_; }

    // Mean pairwise overlap volume among sibling boxes, normalized per
    // dimension by the schema's domain width so volumes are comparable
    // across mixed dimension kinds. Zero when no node has two children.
    double mean_sibling_overlap(const Schema& schema) const;

    void save(const std::filesystem::path& path) const;
    static IndexTree load(const std::filesystem::path& path, const Schema& schema);

    bool structurally_equal(const IndexTree& other) const;

private:
    std::vector<std::vector<IndexNode>> levels_;  // levels_[0] = leaf level, back() = root level
    std::uint64_t schema_digest_ = 0;
    std::uint32_t fanout_ = 0;
    std::uint64_t record_count_ = 0;
    int resolution_ = 0;
    std::uint32_t dim_count_ = 0;
    std::uint32_t measure_count_ = 0;

    void derive_block_ranges();
};

}  // namespace gcube
