#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <vector>

#include "gcube/record.hpp"
#include "gcube/schema.hpp"

namespace gcube {

inline constexpr std::uint32_t block_file_version = 1;
inline constexpr std::uint32_t default_block_capacity = 256;

// Seek/read/write accounting, mostly for tests that pin down the access
// pattern (sequential writes, forward-only scans).
struct IoCounters {
    std::uint64_t bytes_read = 0;
    std::uint64_t bytes_written = 0;
    std::uint64_t forward_seeks = 0;
    std::uint64_t backward_seeks = 0;
};

struct BlockStats {
    std::uint64_t record_count = 0;
    std::uint32_t block_capacity = 0;
    std::uint64_t block_count = 0;
    int resolution = 0;
};

// Bytes of one encoded record: u32 per categorical coordinate, f64 per
// continuous coordinate, f64 per measure. Fixed width keeps every block
// offset computable from the header alone.
std::uint32_t record_width(const Schema& schema);

// Lay records out in ceil(N/B) blocks of B records (the last one short),
// each block followed by its CRC-32. Input must be non-decreasing in
// Hilbert rank at `resolution`; the check streams along with the write and
// names the offending pair on violation. The write itself is one
// sequential pass, no seeks at all.
void write_sorted(const std::vector<Record>& records, const Schema& schema,
                  std::uint32_t block_capacity, int resolution,
                  const std::filesystem::path& path, IoCounters* io = nullptr);

// Header echo without needing the schema; validates magic and version only.
BlockStats block_stats(const std::filesystem::path& path);

// Read access to one block file. Opening validates magic, version and the
// schema digest. Scans are independent cursors (each holds its own stream),
// so concurrent readers never share state.
class BlockFile {
public:
    static BlockFile open(const std::filesystem::path& path, const Schema& schema);

    const BlockStats& stats() const { return stats_; }
    std::uint64_t block_count() const { return stats_.block_count; }
    std::uint64_t record_count() const { return stats_.record_count; }
    int resolution() const { return stats_.resolution; }
    const std::filesystem::path& path() const { return path_; }
    const Schema& schema() const { return *schema_; }

    // Number of records stored in one block (B except possibly the last).
    std::uint32_t block_size(std::uint64_t block_id) const;

    // One open stream with per-block access. Reads may target any block;
    // the seek counters expose the access pattern (queries are expected to
    // drive it forward-only).
    class Reader {
    public:
        std::vector<Record> read(std::uint64_t block_id);
        const IoCounters& io() const { return io_; }

    private:
        friend class BlockFile;
        explicit Reader(const BlockFile& file);

        const BlockFile* file_;
        std::ifstream in_;
        std::uint64_t stream_pos_ = 0;
        IoCounters io_;
    };

    // Forward-only cursor over the half-open block range [from, to).
    class Scan {
    public:
        // Next record, or nullopt at end of range. Verifies each block's
        // checksum as it is read.
        std::optional<Record> next();
        const IoCounters& io() const { return reader_.io(); }

    private:
        friend class BlockFile;
        Scan(const BlockFile& file, std::uint64_t from, std::uint64_t to);

        Reader reader_;
        std::uint64_t next_block_;
        std::uint64_t end_block_;
        std::vector<Record> current_;
        std::size_t cursor_ = 0;
    };

    Reader reader() const { return Reader(*this); }
    Scan scan(std::uint64_t from_block, std::uint64_t to_block) const;
    std::vector<Record> read_block(std::uint64_t block_id) const;
    std::vector<Record> read_all() const;

private:
    BlockFile(std::filesystem::path path, const Schema& schema, BlockStats stats);

    std::filesystem::path path_;
    const Schema* schema_;
    BlockStats stats_;
    std::uint32_t record_width_ = 0;
};

}  // namespace gcube
