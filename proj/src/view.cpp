#include "gcube/view.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gcube/error.hpp"
#include "gcube/grid.hpp"
#include "gcube/hilbert.hpp"
#include "gcube/merge.hpp"

namespace gcube {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string now_iso8601() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ViewMeta meta_from_json(const std::string& text, const fs::path& file) {
    json doc;
    try {
        doc = json::parse(text);
        ViewMeta meta;
        meta.record_count = doc.at("n").get<std::uint64_t>();
        meta.block_capacity = doc.at("block_capacity").get<std::uint32_t>();
        meta.fanout = doc.at("fanout").get<std::uint32_t>();
        meta.resolution = doc.at("resolution").get<int>();
        meta.schema_digest = doc.at("schema_digest").get<std::string>();
        meta.built_at = doc.at("built_at").get<std::string>();
        meta.generation = doc.at("generation").get<std::uint64_t>();
        return meta;
    } catch (const json::exception& e) {
        throw FormatError("meta file " + file.string() + " malformed: " + e.what());
    }
}

std::string meta_to_json(const ViewMeta& meta) {
    return json{{"n", meta.record_count},
                {"block_capacity", meta.block_capacity},
                {"fanout", meta.fanout},
                {"resolution", meta.resolution},
                {"schema_digest", meta.schema_digest},
                {"built_at", meta.built_at},
                {"generation", meta.generation}}
               .dump(2) +
           "\n";
}

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file.string());
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing " + file.string());
}

std::string read_text(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

// Advisory per-view update lock; created O_EXCL, removed on destruction.
class UpdateLock {
public:
    explicit UpdateLock(const fs::path& dir) : path_(dir / ".lock") {
        const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd < 0)
            throw IoError("view " + dir.string() +
                          " is locked by another update (remove .lock if stale)");
        const std::string pid = std::to_string(::getpid()) + "\n";
        [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
        ::close(fd);
    }
    ~UpdateLock() {
        std::error_code ec;
        fs::remove(path_, ec);
    }
    UpdateLock(const UpdateLock&) = delete;
    UpdateLock& operator=(const UpdateLock&) = delete;

private:
    fs::path path_;
};

struct PipelineOutput {
    std::uint64_t block_count = 0;
    std::size_t tree_height = 0;
};

// records must already be in Hilbert order at `resolution`.
PipelineOutput write_generation(const std::vector<Record>& records, const Schema& schema,
                                int resolution, std::uint32_t block_capacity, std::uint32_t fanout,
                                const fs::path& data_file, const fs::path& index_file) {
    write_sorted(records, schema, block_capacity, resolution, data_file);
    const BlockFile blocks = BlockFile::open(data_file, schema);
    const IndexTree index = IndexTree::build(blocks, schema, fanout);
    index.save(index_file);
    return {blocks.block_count(), index.height()};
}

}  // namespace

std::uint64_t collapse_duplicate_keys(std::vector<Record>& sorted) {
    if (sorted.size() < 2) return 0;
    std::vector<Record> kept;
    kept.reserve(sorted.size());
    for (auto& rec : sorted) {
        if (!kept.empty() && kept.back().same_key(rec))
            kept.back() = std::move(rec);  // last occurrence wins
        else
            kept.push_back(std::move(rec));
    }
    const std::uint64_t dropped = sorted.size() - kept.size();
    sorted = std::move(kept);
    return dropped;
}

fs::path View::data_path(const fs::path& dir) { return dir / "data.gcub"; }
fs::path View::index_path(const fs::path& dir) { return dir / "index.gidx"; }
fs::path View::meta_path(const fs::path& dir) { return dir / "meta.json"; }
fs::path View::schema_path(const fs::path& dir) { return dir / "schema.json"; }
fs::path View::dictionaries_path(const fs::path& dir) { return dir / "dictionaries"; }

BuildStats View::build(const fs::path& csv, const fs::path& schema_file, const fs::path& dir,
                       std::uint32_t block_capacity, std::uint32_t fanout) {
    const Schema schema = Schema::load(schema_file);
    Dictionaries dicts = Dictionaries::empty(schema);
    auto ingested = read_csv(csv, schema, dicts, BadRowPolicy::fail);
    return build_from_records(std::move(ingested.records), schema, dicts, dir, block_capacity,
                              fanout);
}

BuildStats View::build_from_records(std::vector<Record> records, const Schema& schema,
                                    const Dictionaries& dicts, const fs::path& dir,
                                    std::uint32_t block_capacity, std::uint32_t fanout) {
    const auto start = std::chrono::steady_clock::now();
    fs::create_directories(dir);

    BuildStats stats;
    stats.resolution = hilbert_sort(records, schema);
    stats.collapsed_duplicates = collapse_duplicate_keys(records);
    stats.record_count = records.size();

    const auto out = write_generation(records, schema, stats.resolution, block_capacity, fanout,
                                      data_path(dir), index_path(dir));
    stats.block_count = out.block_count;
    stats.tree_height = out.tree_height;

    schema.save(schema_path(dir));
    dicts.save(dictionaries_path(dir), schema);

    ViewMeta meta;
    meta.record_count = stats.record_count;
    meta.block_capacity = block_capacity;
    meta.fanout = fanout;
    meta.resolution = stats.resolution;
    meta.schema_digest = schema.digest_hex();
    meta.built_at = now_iso8601();
    meta.generation = 1;
    write_text(meta_path(dir), meta_to_json(meta));

    stats.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                              start)
                        .count();
    return stats;
}

View View::open(const fs::path& dir) {
    View view;
    view.dir_ = dir;
    view.schema_ = Schema::load(schema_path(dir));
    view.meta_ = meta_from_json(read_text(meta_path(dir)), meta_path(dir));
    if (view.meta_.schema_digest != view.schema_.digest_hex())
        throw FormatError("view " + dir.string() + ": meta digest disagrees with schema.json");
    view.dicts_ = Dictionaries::load(dictionaries_path(dir), view.schema_);

    // Cheap cross-checks that the generation is not torn.
    const BlockFile blocks = BlockFile::open(data_path(dir), view.schema_);
    if (blocks.record_count() != view.meta_.record_count ||
        blocks.resolution() != view.meta_.resolution)
        throw FormatError("view " + dir.string() + ": block file disagrees with meta.json");
    const IndexTree index = IndexTree::load(index_path(dir), view.schema_);
    if (index.record_count() != view.meta_.record_count ||
        index.resolution() != view.meta_.resolution)
        throw FormatError("view " + dir.string() + ": index is stale for this generation");
    return view;
}

BlockFile View::blocks() const { return BlockFile::open(data_path(dir_), schema_); }

IndexTree View::index() const { return IndexTree::load(index_path(dir_), schema_); }

UpdateReport View::update(const fs::path& update_csv) {
    const UpdateLock lock(dir_);

    UpdateReport report;
    report.resolution_before = meta_.resolution;
    report.source = update_csv.string();
    report.applied_at = now_iso8601();

    // Per-row validation; dictionary growth stays within the declared
    // cardinality, anything else about a row rejects it.
    Dictionaries dicts = dicts_;
    auto ingested = read_csv(update_csv, schema_, dicts, BadRowPolicy::reject);
    report.rejects = std::move(ingested.rejects);
    report.rejected = report.rejects.size();

    std::vector<Record> batch = std::move(ingested.records);
    hilbert_sort(batch, schema_);
    collapse_duplicate_keys(batch);  // duplicate keys in one batch: last row wins
    report.batch_rows = batch.size();

    const BlockFile blocks = BlockFile::open(data_path(dir_), schema_);
    VectorStream update_stream(std::move(batch));
    BlockScanStream target_stream(blocks);
    MergeResult merged =
        hilbert_merge(update_stream, target_stream, meta_.resolution, schema_);
    report.replaced = merged.replaced;
    report.merged_total = merged.records.size();
    report.resolution_after = merged.final_resolution;

    // New generation next to the old files, then rename into place:
    // data, index, dictionaries, meta last as the commit point.
    const fs::path data_tmp = data_path(dir_).string() + ".tmp";
    const fs::path index_tmp = index_path(dir_).string() + ".tmp";
    write_generation(merged.records, schema_, merged.final_resolution, meta_.block_capacity,
                     meta_.fanout, data_tmp, index_tmp);
    fs::rename(data_tmp, data_path(dir_));
    fs::rename(index_tmp, index_path(dir_));
    dicts.save(dictionaries_path(dir_), schema_);

    ViewMeta meta = meta_;
    meta.record_count = merged.records.size();
    meta.resolution = merged.final_resolution;
    meta.built_at = now_iso8601();
    meta.generation = meta_.generation + 1;
    const fs::path meta_tmp = meta_path(dir_).string() + ".tmp";
    write_text(meta_tmp, meta_to_json(meta));
    fs::rename(meta_tmp, meta_path(dir_));

    meta_ = meta;
    dicts_ = std::move(dicts);
    return report;
}

BuildStats View::rebuild_with_batch(std::vector<Record> batch, const fs::path& out_dir) const {
    std::vector<Record> all = blocks().read_all();

    // Key-replaced union: batch rows overwrite stored rows with equal keys.
    hilbert_sort(batch, schema_);
    collapse_duplicate_keys(batch);
    std::vector<Record> merged;
    merged.reserve(all.size() + batch.size());
    for (auto& rec : all) merged.push_back(std::move(rec));
    for (auto& rec : batch) merged.push_back(std::move(rec));
    // Stable sort keeps batch rows after stored rows within a key, so the
    // last-wins collapse keeps the batch row.
    return build_from_records(std::move(merged), schema_, dicts_, out_dir, meta_.block_capacity,
                              meta_.fanout);
}

}  // namespace gcube
