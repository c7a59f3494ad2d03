#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gcube/block_store.hpp"
#include "gcube/index_tree.hpp"
#include "gcube/ingest.hpp"
#include "gcube/schema.hpp"

namespace gcube {

// A view directory is one immutable generation of a materialized fact
// table:
//   schema.json    declared dimensions/measures
//   data.gcub      Hilbert-ordered block file
//   index.gidx     aggregate-annotated tree over the blocks
//   dictionaries/  categorical token -> id maps
//   meta.json      build parameters and digests
// All files carry the schema digest; a view is valid only when they agree.

struct ViewMeta {
    std::uint64_t record_count = 0;
    std::uint32_t block_capacity = 0;
    std::uint32_t fanout = 0;
    int resolution = 0;
    std::string schema_digest;
    std::string built_at;
    std::uint64_t generation = 1;
};

struct BuildStats {
    std::uint64_t record_count = 0;
    std::uint64_t collapsed_duplicates = 0;
    int resolution = 0;
    std::uint64_t block_count = 0;
    std::size_t tree_height = 0;
    double wall_ms = 0.0;
};

struct UpdateReport {
    std::uint64_t batch_rows = 0;      // accepted rows after per-row validation
    std::uint64_t rejected = 0;
    std::uint64_t merged_total = 0;    // records in the new generation
    std::uint64_t replaced = 0;        // existing keys overwritten
    int resolution_before = 0;
    int resolution_after = 0;
    std::string source;                // batch provenance: update file path
    std::string applied_at;            // and wall-clock timestamp
    std::vector<RejectedRow> rejects;
};

class View {
public:
    // Full pipeline: ingest CSV -> adaptive sort -> block file -> index.
    // Duplicate keys in the load collapse to the last occurrence so the
    // stored view has unique keys (matching the update-batch rule).
    static BuildStats build(const std::filesystem::path& csv,
                            const std::filesystem::path& schema_file,
                            const std::filesystem::path& dir,
                            std::uint32_t block_capacity = default_block_capacity,
                            std::uint32_t fanout = default_fanout);

    // Build directly from validated in-memory records (library callers,
    // benchmarks, tests).
    static BuildStats build_from_records(std::vector<Record> records, const Schema& schema,
                                         const Dictionaries& dicts,
                                         const std::filesystem::path& dir,
                                         std::uint32_t block_capacity = default_block_capacity,
                                         std::uint32_t fanout = default_fanout);

    static View open(const std::filesystem::path& dir);

    const Schema& schema() const { return schema_; }
    const ViewMeta& meta() const { return meta_; }
    const Dictionaries& dictionaries() const { return dicts_; }
    const std::filesystem::path& dir() const { return dir_; }

    // Fresh handles; the BlockFile/IndexTree bind to this view's schema.
    BlockFile blocks() const;
    IndexTree index() const;

    // Absorb an update CSV: per-row validation with rejects, adaptive sort
    // of the batch, one merged pass against the stored records, then a new
    // generation is written and swapped in (write-new-then-rename). Takes
    // the view's advisory update lock for the duration.
    UpdateReport update(const std::filesystem::path& update_csv);

    // The update's merge work done from scratch: key-replaced union of the
    // stored records and the batch, fully re-sorted and rebuilt into
    // `out_dir`. This is the baseline the merge path is benchmarked
    // against.
    BuildStats rebuild_with_batch(std::vector<Record> batch,
                                  const std::filesystem::path& out_dir) const;

    static std::filesystem::path data_path(const std::filesystem::path& dir);
    static std::filesystem::path index_path(const std::filesystem::path& dir);
    static std::filesystem::path meta_path(const std::filesystem::path& dir);
    static std::filesystem::path schema_path(const std::filesystem::path& dir);
    static std::filesystem::path dictionaries_path(const std::filesystem::path& dir);

private:
    std::filesystem::path dir_;
    Schema schema_;
    Dictionaries dicts_;
    ViewMeta meta_;
};

// Collapse runs of equal-key records, keeping the last occurrence of each
// run (records must already be in Hilbert order, equal keys adjacent).
// Returns the number of records dropped.
std::uint64_t collapse_duplicate_keys(std::vector<Record>& sorted);

}  // namespace gcube
