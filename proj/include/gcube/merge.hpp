#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gcube/block_store.hpp"
#include "gcube/record.hpp"
#include "gcube/schema.hpp"

namespace gcube {

// Pull-style record source for the merge. Implementations advance
// monotonically; merge pulls each element exactly once.
class RecordStream {
public:
    virtual ~RecordStream() = default;
    virtual std::optional<Record> next() = 0;
    // Elements handed out so far (positions are 1-based in error messages).
    std::uint64_t pulled() const { return pulled_; }

protected:
    std::uint64_t pulled_ = 0;
};

class VectorStream : public RecordStream {
public:
    explicit VectorStream(std::vector<Record> records) : records_(std::move(records)) {}
    std::optional<Record> next() override {
        if (pos_ >= records_.size()) return std::nullopt;
        ++pulled_;
        return std::move(records_[pos_++]);
    }

private:
    std::vector<Record> records_;
    std::size_t pos_ = 0;
};

class BlockScanStream : public RecordStream {
public:
    explicit BlockScanStream(const BlockFile& file) : scan_(file.scan(0, file.block_count())) {}
    std::optional<Record> next() override {
        auto r = scan_.next();
        if (r) ++pulled_;
        return r;
    }

private:
    BlockFile::Scan scan_;
};

struct MergeResult {
    std::vector<Record> records;
    int final_resolution = 0;
    std::uint64_t replaced = 0;  // key matches: update record kept, target dropped
};

// Single merged pass over two Hilbert-ordered streams. Equal keys keep the
// update record and drop the target one; otherwise the smaller-ranked
// record is emitted and its stream advanced. Comparisons may raise the
// resolution; records already emitted stay correctly placed because
// refinement preserves separated order. Each stream is checked for
// monotonicity as it is consumed; a violation names the stream and the
// 1-based position. |output| = |target| + |update| - replaced.
MergeResult hilbert_merge(RecordStream& update, RecordStream& target, int resolution,
                          const Schema& schema);

}  // namespace gcube
