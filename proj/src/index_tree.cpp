#include "gcube/index_tree.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "gcube/error.hpp"
#include "gcube/grid.hpp"
#include "gcube/hilbert.hpp"

namespace gcube {

namespace {

constexpr char kMagic[4] = {'G', 'I', 'D', 'X'};

void put_u32(std::vector<char>& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::vector<char>& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::vector<char>& buf, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(buf, bits);
}

struct ByteReader {
    const char* p;
    const char* end;
    const std::filesystem::path& path;

    void need(std::size_t n) const {
        if (static_cast<std::size_t>(end - p) < n)
            throw FormatError("truncated index file " + path.string());
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
        p += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
        p += 8;
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
};

std::uint32_t rank_byte_width(std::uint32_t dim_count, int resolution) {
    return (dim_count * static_cast<std::uint32_t>(resolution) + 7) / 8;
}

}  // namespace

BoundingBox BoundingBox::around(const Record& record) {
    BoundingBox box;
    box.dims.reserve(record.coords().size());
    for (double c : record.coords()) box.dims.push_back({c, c});
    return box;
}

void BoundingBox::expand(const Record& record) {
    for (std::size_t i = 0; i < dims.size(); ++i) {
        dims[i].lo = std::min(dims[i].lo, record.coord(i));
        dims[i].hi = std::max(dims[i].hi, record.coord(i));
    }
}

void BoundingBox::expand(const BoundingBox& other) {
    for (std::size_t i = 0; i < dims.size(); ++i) {
        dims[i].lo = std::min(dims[i].lo, other.dims[i].lo);
        dims[i].hi = std::max(dims[i].hi, other.dims[i].hi);
    }
}

NodeAggregate NodeAggregate::identity(std::size_t measure_count) {
    NodeAggregate agg;
    agg.measures.resize(measure_count);
    return agg;
}

void NodeAggregate::fold_record(const Record& record) {
    for (std::size_t i = 0; i < measures.size(); ++i) {
        const double v = record.measure(i);
        if (count == 0) {
            measures[i].sum += v;
            measures[i].min = v;
            measures[i].max = v;
        } else {
            measures[i].sum += v;
            measures[i].min = std::min(measures[i].min, v);
            measures[i].max = std::max(measures[i].max, v);
        }
    }
    ++count;
}

void NodeAggregate::merge(const NodeAggregate& other) {
    if (other.count == 0) return;
    if (count == 0) {
        *this = other;
        return;
    }
    count += other.count;
    for (std::size_t i = 0; i < measures.size(); ++i) {
        measures[i].sum += other.measures[i].sum;
        measures[i].min = std::min(measures[i].min, other.measures[i].min);
        measures[i].max = std::max(measures[i].max, other.measures[i].max);
    }
}

std::pair<BoundingBox, NodeAggregate> node_annotate(std::span<const IndexNode> children) {
    if (children.empty()) throw DomainError("node_annotate requires at least one child");
    BoundingBox box = children.front().box;
    NodeAggregate agg = children.front().agg;
    for (std::size_t i = 1; i < children.size(); ++i) {
        box.expand(children[i].box);
        agg.merge(children[i].agg);
    }
    return {std::move(box), std::move(agg)};
}

IndexTree IndexTree::build(const BlockFile& blocks, const Schema& schema, std::uint32_t fanout) {
    if (fanout < 2) throw DomainError("fanout must be >= 2");

    IndexTree tree;
    tree.schema_digest_ = schema.digest();
    tree.fanout_ = fanout;
    tree.record_count_ = blocks.record_count();
    tree.resolution_ = blocks.resolution();
    tree.dim_count_ = static_cast<std::uint32_t>(schema.dim_count());
    tree.measure_count_ = static_cast<std::uint32_t>(schema.measure_count());

    if (blocks.block_count() == 0) return tree;  // empty sentinel

    // Leaf level: one node per block, box and aggregate folded in one scan.
    std::vector<IndexNode> level;
    level.reserve(blocks.block_count());
    auto cursor = blocks.scan(0, blocks.block_count());
    for (std::uint64_t b = 0; b < blocks.block_count(); ++b) {
        IndexNode node;
        node.level = 0;
        node.block_id = b;
        node.block_lo = node.block_hi = b;
        node.agg = NodeAggregate::identity(schema.measure_count());
        const std::uint32_t count = blocks.block_size(b);
        for (std::uint32_t i = 0; i < count; ++i) {
            auto rec = cursor.next();
            if (!rec) throw FormatError("block file shorter than its header claims");
            if (i == 0) {
                node.box = BoundingBox::around(*rec);
                node.first_rank = record_rank(*rec, schema, blocks.resolution(), false);
            } else {
                node.box.expand(*rec);
            }
            node.agg.fold_record(*rec);
        }
        level.push_back(std::move(node));
    }
    tree.levels_.push_back(std::move(level));

    // Group consecutive runs of up to F nodes until a single root remains.
    // A trailing remainder of 1 borrows from the previous full group so no
    // internal node ends up with a single child (impossible only at F = 2,
    // where a lone child is tolerated).
    while (tree.levels_.back().size() > 1) {
        const auto& below = tree.levels_.back();
        std::vector<IndexNode> parents;
        std::size_t i = 0;
        while (i < below.size()) {
            std::size_t take = std::min<std::size_t>(fanout, below.size() - i);
            if (below.size() - i - take == 1 && take > 2) --take;
            IndexNode node;
            node.level = below.front().level + 1;
            node.child_begin = i;
            node.child_count = static_cast<std::uint32_t>(take);
            auto [box, agg] = node_annotate(std::span<const IndexNode>(below.data() + i, take));
            node.box = std::move(box);
            node.agg = std::move(agg);
            node.block_lo = below[i].block_lo;
            node.block_hi = below[i + take - 1].block_hi;
            parents.push_back(std::move(node));
            i += take;
        }
        tree.levels_.push_back(std::move(parents));
    }
    return tree;
}

const IndexNode& IndexTree::child(const IndexNode& parent, std::uint32_t i) const {
    return levels_[parent.level - 1][parent.child_begin + i];
}

std::uint64_t IndexTree::node_count() const {
    std::uint64_t n = 0;
    for (const auto& l : levels_) n += l.size();
    return n;
}

std::vector<std::uint64_t> IndexTree::level_node_counts() const {
    std::vector<std::uint64_t> counts;
    counts.reserve(levels_.size());
    for (const auto& l : levels_) counts.push_back(l.size());
    return counts;
}

double IndexTree::mean_sibling_overlap(const Schema& schema) const {
    double total = 0.0;
    std::uint64_t pairs = 0;
    for (std::size_t lv = 1; lv < levels_.size(); ++lv) {
        for (const auto& parent : levels_[lv]) {
            for (std::uint32_t a = 0; a < parent.child_count; ++a) {
                for (std::uint32_t b = a + 1; b < parent.child_count; ++b) {
                    const auto& ba = child(parent, a).box;
                    const auto& bb = child(parent, b).box;
                    double vol = 1.0;
                    for (std::size_t d = 0; d < schema.dim_count(); ++d) {
                        const auto& spec = schema.dimension(d);
                        const double width = spec.kind == DimKind::categorical
                                                 ? std::max<double>(spec.cardinality - 1, 1)
                                                 : spec.hi - spec.lo;
                        const double lo = std::max(ba.dims[d].lo, bb.dims[d].lo);
                        const double hi = std::min(ba.dims[d].hi, bb.dims[d].hi);
                        vol *= std::max(0.0, hi - lo) / width;
                        if (vol == 0.0) break;
                    }
                    total += vol;
                    ++pairs;
                }
            }
        }
    }
    return pairs == 0 ? 0.0 : total / static_cast<double>(pairs);
}

void IndexTree::save(const std::filesystem::path& path) const {
    std::vector<char> buf;
    buf.insert(buf.end(), kMagic, kMagic + 4);
    put_u32(buf, index_file_version);
    put_u64(buf, schema_digest_);
    put_u32(buf, fanout_);
    put_u32(buf, static_cast<std::uint32_t>(resolution_));
    put_u64(buf, record_count_);
    put_u32(buf, dim_count_);
    put_u32(buf, measure_count_);
    put_u32(buf, static_cast<std::uint32_t>(levels_.size()));
    const std::uint32_t rank_bytes = rank_byte_width(dim_count_, resolution_);
    put_u32(buf, rank_bytes);
    for (const auto& l : levels_) put_u64(buf, l.size());

    for (const auto& level : levels_) {
        for (const auto& node : level) {
            for (const auto& iv : node.box.dims) {
                put_f64(buf, iv.lo);
                put_f64(buf, iv.hi);
            }
            put_u64(buf, node.agg.count);
            for (const auto& m : node.agg.measures) {
                put_f64(buf, m.sum);
                put_f64(buf, m.min);
                put_f64(buf, m.max);
            }
            if (node.level == 0) {
                put_u64(buf, node.block_id);
                put_u32(buf, 0);
                for (std::uint32_t i = 0; i < rank_bytes; ++i) {
                    const RankInt byte = (node.first_rank >> (8 * i)) & 0xff;
                    buf.push_back(static_cast<char>(byte.convert_to<unsigned>()));
                }
            } else {
                put_u64(buf, node.child_begin);
                put_u32(buf, node.child_count);
            }
        }
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create index file " + path.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    out.flush();
    if (!out) throw IoError("failed writing index file " + path.string());
}

IndexTree IndexTree::load(const std::filesystem::path& path, const Schema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open index file " + path.string());
    std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0)
        throw FormatError("bad magic in " + path.string() + " (not an index file)");

    ByteReader r{buf.data() + 4, buf.data() + buf.size(), path};
    const std::uint32_t version = r.u32();
    if (version != index_file_version)
        throw FormatError("unsupported index file version " + std::to_string(version));

    IndexTree tree;
    tree.schema_digest_ = r.u64();
    if (tree.schema_digest_ != schema.digest())
        throw FormatError("stale index: " + path.string() +
                          " does not match the current schema digest");
    tree.fanout_ = r.u32();
    tree.resolution_ = static_cast<int>(r.u32());
    tree.record_count_ = r.u64();
    tree.dim_count_ = r.u32();
    tree.measure_count_ = r.u32();
    if (tree.dim_count_ != schema.dim_count() || tree.measure_count_ != schema.measure_count())
        throw FormatError("index file " + path.string() + " layout disagrees with schema");
    const std::uint32_t level_count = r.u32();
    const std::uint32_t rank_bytes = r.u32();
    std::vector<std::uint64_t> counts(level_count);
    for (auto& c : counts) c = r.u64();

    for (std::uint32_t lv = 0; lv < level_count; ++lv) {
        std::vector<IndexNode> level;
        level.reserve(counts[lv]);
        for (std::uint64_t n = 0; n < counts[lv]; ++n) {
            IndexNode node;
            node.level = lv;
            node.box.dims.resize(tree.dim_count_);
            for (auto& iv : node.box.dims) {
                iv.lo = r.f64();
                iv.hi = r.f64();
            }
            node.agg.count = r.u64();
            node.agg.measures.resize(tree.measure_count_);
            for (auto& m : node.agg.measures) {
                m.sum = r.f64();
                m.min = r.f64();
                m.max = r.f64();
            }
            const std::uint64_t a = r.u64();
            const std::uint32_t b = r.u32();
            if (lv == 0) {
                node.block_id = a;
                r.need(rank_bytes);
                RankInt rank = 0;
                for (std::uint32_t i = rank_bytes; i-- > 0;) {
                    rank <<= 8;
                    rank |= static_cast<unsigned char>(r.p[i]);
                }
                r.p += rank_bytes;
                node.first_rank = std::move(rank);
            } else {
                node.child_begin = a;
                node.child_count = b;
            }
            level.push_back(std::move(node));
        }
        tree.levels_.push_back(std::move(level));
    }
    if (r.p != r.end) throw FormatError("trailing bytes in index file " + path.string());
    tree.derive_block_ranges();
    return tree;
}

void IndexTree::derive_block_ranges() {
    if (levels_.empty()) return;
    for (auto& node : levels_[0]) node.block_lo = node.block_hi = node.block_id;
    for (std::size_t lv = 1; lv < levels_.size(); ++lv) {
        for (auto& node : levels_[lv]) {
            node.block_lo = levels_[lv - 1][node.child_begin].block_lo;
            node.block_hi = levels_[lv - 1][node.child_begin + node.child_count - 1].block_hi;
        }
    }
}

bool IndexTree::structurally_equal(const IndexTree& other) const {
    if (levels_.size() != other.levels_.size() || schema_digest_ != other.schema_digest_ ||
        fanout_ != other.fanout_ || record_count_ != other.record_count_ ||
        resolution_ != other.resolution_)
        return false;
    for (std::size_t lv = 0; lv < levels_.size(); ++lv) {
        if (levels_[lv].size() != other.levels_[lv].size()) return false;
        for (std::size_t i = 0; i < levels_[lv].size(); ++i) {
            const auto& a = levels_[lv][i];
            const auto& b = other.levels_[lv][i];
            if (a.level != b.level || !(a.box == b.box) || !(a.agg == b.agg) ||
                a.block_id != b.block_id || a.first_rank != b.first_rank ||
                a.child_begin != b.child_begin || a.child_count != b.child_count)
                return false;
        }
    }
    return true;
}

}  // namespace gcube
