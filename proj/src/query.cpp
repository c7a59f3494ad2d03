#include "gcube/query.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <nlohmann/json.hpp>

#include "gcube/error.hpp"

namespace gcube {

using nlohmann::json;

QueryRegion QueryRegion::unconstrained(std::size_t dim_count) {
    QueryRegion r;
    r.dims.resize(dim_count);
    return r;
}

void QueryRegion::validate(const Schema& schema) const {
    if (dims.size() != schema.dim_count())
        throw QueryError("region has " + std::to_string(dims.size()) + " dimensions, schema has " +
                         std::to_string(schema.dim_count()));
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (!dims[i]) continue;
        const auto& iv = *dims[i];
        if (std::isnan(iv.lo) || std::isnan(iv.hi) || iv.lo > iv.hi)
            throw QueryError("invalid interval on dimension '" + schema.dimension(i).name + "'");
        if (schema.dimension(i).kind == DimKind::categorical &&
            (iv.lo != std::floor(iv.lo) || iv.hi != std::floor(iv.hi)))
            throw QueryError("categorical interval on '" + schema.dimension(i).name +
                             "' must have integer endpoints");
    }
}

bool QueryRegion::contains(const Record& record) const {
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (!dims[i]) continue;
        const double v = record.coord(i);
        if (v < dims[i]->lo || v > dims[i]->hi) return false;
    }
    return true;
}

AggregateFn aggregate_fn_from_name(const std::string& name) {
    if (name == "count") return AggregateFn::count;
    if (name == "sum") return AggregateFn::sum;
    if (name == "avg") return AggregateFn::avg;
    if (name == "min") return AggregateFn::min;
    if (name == "max") return AggregateFn::max;
    if (name == "median") return AggregateFn::median;
    throw QueryError("unknown aggregate function '" + name + "'");
}

std::string aggregate_fn_name(AggregateFn fn) {
    switch (fn) {
        case AggregateFn::count: return "count";
        case AggregateFn::sum: return "sum";
        case AggregateFn::avg: return "avg";
        case AggregateFn::min: return "min";
        case AggregateFn::max: return "max";
        case AggregateFn::median: return "median";
    }
    return "?";
}

namespace {

enum class Rel { disjoint, partial, contained };

Rel classify(const BoundingBox& box, const QueryRegion& region) {
    bool contained = true;
    for (std::size_t i = 0; i < region.dims.size(); ++i) {
        if (!region.dims[i]) continue;
        const auto& r = *region.dims[i];
        const auto& b = box.dims[i];
        if (r.hi < b.lo || r.lo > b.hi) return Rel::disjoint;
        if (r.lo > b.lo || b.hi > r.hi) contained = false;
    }
    return contained ? Rel::contained : Rel::partial;
}

// One BFS over the tree, frontier kept in an explicit queue. Nodes are
// "visited" when popped and classified; children are enqueued only on
// partial overlap.
struct TraversalPlan {
    std::uint64_t nodes_visited = 0;
    std::vector<const IndexNode*> contained;      // in BFS order
    std::vector<std::uint64_t> partial_blocks;    // ascending
};

TraversalPlan plan_traversal(const IndexTree& index, const QueryRegion& region) {
    TraversalPlan plan;
    if (index.empty()) return plan;
    std::deque<const IndexNode*> frontier{&index.root()};
    while (!frontier.empty()) {
        const IndexNode* node = frontier.front();
        frontier.pop_front();
        ++plan.nodes_visited;
        switch (classify(node->box, region)) {
            case Rel::disjoint:
                break;
            case Rel::contained:
                plan.contained.push_back(node);
                break;
            case Rel::partial:
                if (node->level == 0) {
                    plan.partial_blocks.push_back(node->block_id);
                } else {
                    for (std::uint32_t i = 0; i < node->child_count; ++i)
                        frontier.push_back(&index.child(*node, i));
                }
                break;
        }
    }
    // Level-order enqueueing keeps leaf discovery in stored order; the
    // forward-seek discipline at the leaf layer depends on it.
    for (std::size_t i = 1; i < plan.partial_blocks.size(); ++i)
        if (plan.partial_blocks[i - 1] >= plan.partial_blocks[i])
            throw Error("internal: leaf blocks left BFS out of order");
    return plan;
}

struct Fold {
    std::uint64_t count = 0;
    double sum = 0.0;
    double min = 0.0;
    double max = 0.0;

    void add_value(double v) {
        if (count == 0) {
            sum = v;
            min = v;
            max = v;
        } else {
            sum += v;
            min = std::min(min, v);
            max = std::max(max, v);
        }
        ++count;
    }
    void add_count_only() { ++count; }
    void merge_node(const NodeAggregate& agg, std::optional<std::size_t> measure) {
        if (agg.count == 0) return;
        if (measure) {
            const auto& m = agg.measures[*measure];
            if (count == 0) {
                sum = m.sum;
                min = m.min;
                max = m.max;
            } else {
                sum += m.sum;
                min = std::min(min, m.min);
                max = std::max(max, m.max);
            }
        }
        count += agg.count;
    }
};

struct FoldStats {
    Fold fold;
    std::uint64_t nodes_visited = 0;
    std::uint64_t blocks_read = 0;
};

FoldStats aggregate_fold(const IndexTree& index, const BlockFile& blocks,
                         const QueryRegion& region, std::optional<std::size_t> measure) {
    const TraversalPlan plan = plan_traversal(index, region);
    FoldStats out;
    out.nodes_visited = plan.nodes_visited;

    for (const IndexNode* node : plan.contained) out.fold.merge_node(node->agg, measure);

    if (!plan.partial_blocks.empty()) {
        auto reader = blocks.reader();
        for (std::uint64_t id : plan.partial_blocks) {
            for (const Record& rec : reader.read(id)) {
                if (!region.contains(rec)) continue;
                if (measure)
                    out.fold.add_value(rec.measure(*measure));
                else
                    out.fold.add_count_only();
            }
            ++out.blocks_read;
        }
        if (reader.io().backward_seeks != 0)
            throw Error("internal: backward seek during query leaf scan");
    }
    return out;
}

QueryResult result_from_fold(const FoldStats& fs, AggregateFn fn) {
    QueryResult res;
    res.nodes_visited = fs.nodes_visited;
    res.blocks_read = fs.blocks_read;
    res.empty_region = fs.fold.count == 0;
    switch (fn) {
        case AggregateFn::count:
            res.count = fs.fold.count;
            break;
        case AggregateFn::sum:
            res.value = fs.fold.sum;  // empty region keeps the additive identity
            break;
        case AggregateFn::avg:
            if (fs.fold.count > 0)
                res.value = fs.fold.sum / static_cast<double>(fs.fold.count);
            break;
        case AggregateFn::min:
            if (fs.fold.count > 0) res.value = fs.fold.min;
            break;
        case AggregateFn::max:
            if (fs.fold.count > 0) res.value = fs.fold.max;
            break;
        case AggregateFn::median:
            throw QueryError("median is holistic; use range_median");
    }
    return res;
}

std::optional<std::size_t> resolve_measure(const AggregateRequest& request, const Schema& schema) {
    if (request.fn == AggregateFn::count) {
        if (!request.measure.empty())
            throw QueryError("count does not take a measure");
        return std::nullopt;
    }
    return schema.measure_index(request.measure);
}

double median_of(std::vector<double>& values) {
    const std::size_t n = values.size();
    auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(values.begin(), mid, values.end());
    if (n % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(values.begin(), mid);
    return (lower + upper) / 2.0;
}

}  // namespace

QueryResult range_aggregate(const IndexTree& index, const BlockFile& blocks,
                            const QueryRegion& region, const AggregateRequest& request) {
    const Schema& schema = blocks.schema();
    region.validate(schema);
    if (request.fn == AggregateFn::median)
        throw QueryError("median is holistic; use range_median");
    const auto measure = resolve_measure(request, schema);
    return result_from_fold(aggregate_fold(index, blocks, region, measure), request.fn);
}

void range_retrieve(const IndexTree& index, const BlockFile& blocks, const QueryRegion& region,
                    const std::function<void(const Record&)>& emit, QueryResult* stats) {
    region.validate(blocks.schema());
    const TraversalPlan plan = plan_traversal(index, region);
    if (stats) stats->nodes_visited = plan.nodes_visited;

    // Contained subtrees cover contiguous block ranges; merge them with the
    // partially overlapping blocks into one ascending pass.
    struct Piece {
        std::uint64_t lo, hi;  // inclusive block range
        bool full;
    };
    std::vector<Piece> pieces;
    pieces.reserve(plan.contained.size() + plan.partial_blocks.size());
    for (const IndexNode* node : plan.contained)
        pieces.push_back({node->block_lo, node->block_hi, true});
    for (std::uint64_t id : plan.partial_blocks) pieces.push_back({id, id, false});
    std::sort(pieces.begin(), pieces.end(),
              [](const Piece& a, const Piece& b) { return a.lo < b.lo; });

    std::uint64_t blocks_read = 0;
    if (!pieces.empty()) {
        auto reader = blocks.reader();
        for (const Piece& piece : pieces) {
            for (std::uint64_t id = piece.lo; id <= piece.hi; ++id) {
                for (const Record& rec : reader.read(id))
                    if (piece.full || region.contains(rec)) emit(rec);
                ++blocks_read;
            }
        }
        if (reader.io().backward_seeks != 0)
            throw Error("internal: backward seek during retrieval");
    }
    if (stats) stats->blocks_read = blocks_read;
}

std::vector<Record> range_retrieve(const IndexTree& index, const BlockFile& blocks,
                                   const QueryRegion& region) {
    std::vector<Record> out;
    range_retrieve(index, blocks, region, [&](const Record& r) { out.push_back(r); });
    return out;
}

QueryResult range_median(const IndexTree& index, const BlockFile& blocks,
                         const QueryRegion& region, const std::string& measure) {
    const std::size_t mi = blocks.schema().measure_index(measure);
    QueryResult res;
    std::vector<double> values;
    range_retrieve(index, blocks, region, [&](const Record& r) { values.push_back(r.measure(mi)); },
                   &res);
    res.empty_region = values.empty();
    if (!values.empty()) res.value = median_of(values);
    return res;
}

QueryDocument parse_query_document(const std::string& json_text, const Schema& schema) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw QueryError(std::string("query is not valid JSON: ") + e.what());
    }

    QueryDocument out;
    out.dims.resize(schema.dim_count());
    try {
        if (doc.contains("region")) {
            for (const auto& [name, pred] : doc.at("region").items()) {
                const std::size_t di = schema.dimension_index(name);
                auto& slot = out.dims[di];
                if (pred.is_array()) {
                    if (pred.size() != 2)
                        throw QueryError("interval for '" + name + "' must be [lo, hi]");
                    slot.interval = Interval{pred[0].get<double>(), pred[1].get<double>()};
                } else if (pred.is_object() && pred.contains("in")) {
                    if (schema.dimension(di).kind != DimKind::categorical)
                        throw QueryError("set predicate on '" + name +
                                         "' requires a categorical dimension");
                    for (const auto& v : pred.at("in")) slot.in_set.push_back(v.get<double>());
                    if (slot.in_set.empty())
                        throw QueryError("empty set predicate on '" + name + "'");
                } else {
                    throw QueryError("predicate for '" + name + "' must be [lo, hi] or {\"in\": [...]}");
                }
            }
        }
        const auto& agg = doc.at("aggregate");
        out.request.fn = aggregate_fn_from_name(agg.at("fn").get<std::string>());
        if (agg.contains("measure")) out.request.measure = agg.at("measure").get<std::string>();
    } catch (const json::exception& e) {
        throw QueryError(std::string("query document malformed: ") + e.what());
    }
    return out;
}

namespace {

// Expand set predicates into the cartesian product of per-value intervals.
// The resulting regions are pairwise disjoint, so additive combination is
// exact.
std::vector<QueryRegion> decompose(const QueryDocument& doc) {
    std::vector<QueryRegion> regions;
    QueryRegion base;
    base.dims.resize(doc.dims.size());
    for (std::size_t i = 0; i < doc.dims.size(); ++i) base.dims[i] = doc.dims[i].interval;
    regions.push_back(std::move(base));

    for (std::size_t i = 0; i < doc.dims.size(); ++i) {
        const auto& set = doc.dims[i].in_set;
        if (set.empty()) continue;
        std::vector<QueryRegion> next;
        next.reserve(regions.size() * set.size());
        for (const auto& region : regions) {
            for (double v : set) {
                QueryRegion r = region;
                r.dims[i] = Interval{v, v};
                next.push_back(std::move(r));
            }
        }
        regions = std::move(next);
        if (regions.size() > 4096)
            throw QueryError("set predicates expand to more than 4096 subqueries");
    }
    return regions;
}

}  // namespace

QueryResult run_query_document(const IndexTree& index, const BlockFile& blocks,
                               const QueryDocument& doc) {
    const Schema& schema = blocks.schema();
    const auto regions = decompose(doc);
    if (regions.size() == 1 && doc.request.fn != AggregateFn::median)
        return range_aggregate(index, blocks, regions.front(), doc.request);

    if (doc.request.fn == AggregateFn::median) {
        const std::size_t mi = schema.measure_index(doc.request.measure);
        QueryResult res;
        std::vector<double> values;
        for (const auto& region : regions) {
            QueryResult stats;
            range_retrieve(index, blocks, region,
                           [&](const Record& r) { values.push_back(r.measure(mi)); }, &stats);
            res.nodes_visited += stats.nodes_visited;
            res.blocks_read += stats.blocks_read;
        }
        res.empty_region = values.empty();
        if (!values.empty()) res.value = median_of(values);
        return res;
    }

    const auto measure = resolve_measure(doc.request, schema);
    FoldStats total;
    for (const auto& region : regions) {
        region.validate(schema);
        const FoldStats fs = aggregate_fold(index, blocks, region, measure);
        total.nodes_visited += fs.nodes_visited;
        total.blocks_read += fs.blocks_read;
        if (fs.fold.count > 0) {
            if (total.fold.count == 0) {
                total.fold = fs.fold;
            } else {
                total.fold.sum += fs.fold.sum;
                total.fold.min = std::min(total.fold.min, fs.fold.min);
                total.fold.max = std::max(total.fold.max, fs.fold.max);
                total.fold.count += fs.fold.count;
            }
        }
    }
    return result_from_fold(total, doc.request.fn);
}

std::string render_result_json(const QueryDocument& doc, const QueryResult& result,
                               const Schema& schema) {
    json region = json::object();
    for (std::size_t i = 0; i < doc.dims.size(); ++i) {
        const auto& name = schema.dimension(i).name;
        if (!doc.dims[i].in_set.empty())
            region[name] = json{{"in", doc.dims[i].in_set}};
        else if (doc.dims[i].interval)
            region[name] = json::array({doc.dims[i].interval->lo, doc.dims[i].interval->hi});
    }
    json aggregate{{"fn", aggregate_fn_name(doc.request.fn)}};
    if (!doc.request.measure.empty()) aggregate["measure"] = doc.request.measure;

    json value;
    if (result.count)
        value = *result.count;
    else if (result.value)
        value = *result.value;

    json out{{"query", {{"region", std::move(region)}, {"aggregate", std::move(aggregate)}}},
             {"result",
              {{"value", std::move(value)},
               {"empty_region", result.empty_region},
               {"nodes_visited", result.nodes_visited},
               {"blocks_read", result.blocks_read}}}};
    return out.dump(2) + "\n";
}

}  // namespace gcube
