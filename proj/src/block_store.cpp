#include "gcube/block_store.hpp"

#include <cstring>
#include <string>

#include <zlib.h>

#include "gcube/error.hpp"
#include "gcube/hilbert.hpp"

namespace gcube {

namespace {

constexpr char kMagic[4] = {'G', 'C', 'U', 'B'};
constexpr std::size_t kHeaderSize = 48;

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

std::uint32_t get_u32(const char* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
    return v;
}

std::uint64_t get_u64(const char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
    return v;
}

double get_f64(const char* p) {
    const std::uint64_t bits = get_u64(p);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

std::uint32_t payload_crc(const std::vector<char>& payload) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(payload.data()),
                static_cast<uInt>(payload.size())));
}

struct Header {
    std::uint64_t digest;
    std::uint64_t record_count;
    std::uint32_t block_capacity;
    std::uint32_t resolution;
    std::uint32_t dim_count;
    std::uint32_t measure_count;
    std::uint32_t rec_width;
};

std::vector<char> encode_header(const Header& h) {
    std::vector<char> buf;
    buf.reserve(kHeaderSize);
    buf.insert(buf.end(), kMagic, kMagic + 4);
    put_u32(buf, block_file_version);
    put_u64(buf, h.digest);
    put_u64(buf, h.record_count);
    put_u32(buf, h.block_capacity);
    put_u32(buf, h.resolution);
    put_u32(buf, h.dim_count);
    put_u32(buf, h.measure_count);
    put_u32(buf, h.rec_width);
    put_u32(buf, 0);  // reserved
    return buf;
}

Header read_header(std::ifstream& in, const std::filesystem::path& path) {
    char buf[kHeaderSize];
    in.read(buf, kHeaderSize);
    if (in.gcount() != static_cast<std::streamsize>(kHeaderSize))
        throw FormatError("truncated block file header in " + path.string());
    if (std::memcmp(buf, kMagic, 4) != 0)
        throw FormatError("bad magic in " + path.string() + " (not a block file)");
    const std::uint32_t version = get_u32(buf + 4);
    if (version != block_file_version)
        throw FormatError("unsupported block file version " + std::to_string(version) + " in " +
                          path.string());
    Header h;
    h.digest = get_u64(buf + 8);
    h.record_count = get_u64(buf + 16);
    h.block_capacity = get_u32(buf + 24);
    h.resolution = get_u32(buf + 28);
    h.dim_count = get_u32(buf + 32);
    h.measure_count = get_u32(buf + 36);
    h.rec_width = get_u32(buf + 40);
    return h;
}

void encode_record(std::vector<char>& buf, const Record& rec, const Schema& schema) {
    for (std::size_t i = 0; i < schema.dim_count(); ++i) {
        if (schema.dimension(i).kind == DimKind::categorical)
            put_u32(buf, static_cast<std::uint32_t>(rec.coord(i)));
        else
            put_f64(buf, rec.coord(i));
    }
    for (double m : rec.measures()) put_f64(buf, m);
}

Record decode_record(const char* p, const Schema& schema) {
    std::vector<double> coords(schema.dim_count());
    for (std::size_t i = 0; i < schema.dim_count(); ++i) {
        if (schema.dimension(i).kind == DimKind::categorical) {
            coords[i] = static_cast<double>(get_u32(p));
            p += 4;
        } else {
            coords[i] = get_f64(p);
            p += 8;
        }
    }
    std::vector<double> measures(schema.measure_count());
    for (std::size_t i = 0; i < schema.measure_count(); ++i) {
        measures[i] = get_f64(p);
        p += 8;
    }
    return Record(schema, std::move(coords), std::move(measures));
}

std::uint64_t block_count_for(std::uint64_t n, std::uint32_t b) {
    return (n + b - 1) / b;
}

}  // namespace

std::uint32_t record_width(const Schema& schema) {
    std::uint32_t w = 0;
    for (const auto& d : schema.dimensions()) w += d.kind == DimKind::categorical ? 4 : 8;
    return w + 8 * static_cast<std::uint32_t>(schema.measure_count());
}

void write_sorted(const std::vector<Record>& records, const Schema& schema,
                  std::uint32_t block_capacity, int resolution,
                  const std::filesystem::path& path, IoCounters* io) {
    if (block_capacity < 1) throw DomainError("block capacity must be >= 1");

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create block file " + path.string());

    const std::uint32_t width = record_width(schema);
    Header h{schema.digest(), records.size(), block_capacity,
             static_cast<std::uint32_t>(resolution),
             static_cast<std::uint32_t>(schema.dim_count()),
             static_cast<std::uint32_t>(schema.measure_count()), width};
    const auto header = encode_header(h);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    if (io) io->bytes_written += header.size();

    RankInt prev_rank;
    std::vector<char> payload;
    payload.reserve(static_cast<std::size_t>(block_capacity) * width);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const RankInt rank = record_rank(records[i], schema, resolution);
        if (i > 0 && rank < prev_rank)
            throw OrderError("records out of Hilbert order between index " + std::to_string(i - 1) +
                             " and " + std::to_string(i));
        prev_rank = rank;

        encode_record(payload, records[i], schema);
        const bool block_full = payload.size() == static_cast<std::size_t>(block_capacity) * width;
        if (block_full || i + 1 == records.size()) {
            payload.resize(static_cast<std::size_t>(block_capacity) * width, 0);  // pad short tail
            const std::uint32_t crc = payload_crc(payload);
            out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
            std::vector<char> tail;
            put_u32(tail, crc);
            out.write(tail.data(), 4);
            if (io) io->bytes_written += payload.size() + 4;
            payload.clear();
        }
    }
    out.flush();
    if (!out) throw IoError("failed writing block file " + path.string());
}

BlockStats block_stats(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open block file " + path.string());
    const Header h = read_header(in, path);
    return BlockStats{h.record_count, h.block_capacity,
                      block_count_for(h.record_count, h.block_capacity),
                      static_cast<int>(h.resolution)};
}

BlockFile::BlockFile(std::filesystem::path path, const Schema& schema, BlockStats stats)
    : path_(std::move(path)), schema_(&schema), stats_(stats), record_width_(record_width(schema)) {}

BlockFile BlockFile::open(const std::filesystem::path& path, const Schema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open block file " + path.string());
    const Header h = read_header(in, path);
    if (h.digest != schema.digest())
        throw FormatError("block file " + path.string() + " was built against a different schema");
    if (h.dim_count != schema.dim_count() || h.measure_count != schema.measure_count() ||
        h.rec_width != record_width(schema))
        throw FormatError("block file " + path.string() + " layout disagrees with schema");
    return BlockFile(path, schema,
                     BlockStats{h.record_count, h.block_capacity,
                                block_count_for(h.record_count, h.block_capacity),
                                static_cast<int>(h.resolution)});
}

std::uint32_t BlockFile::block_size(std::uint64_t block_id) const {
    if (block_id >= stats_.block_count)
        throw DomainError("block id " + std::to_string(block_id) + " out of bounds");
    if (block_id + 1 < stats_.block_count) return stats_.block_capacity;
    return static_cast<std::uint32_t>(stats_.record_count -
                                      (stats_.block_count - 1) * stats_.block_capacity);
}

BlockFile::Reader::Reader(const BlockFile& file) : file_(&file) {
    in_.open(file.path_, std::ios::binary);
    if (!in_) throw IoError("cannot open block file " + file.path_.string());
}

std::vector<Record> BlockFile::Reader::read(std::uint64_t block_id) {
    if (block_id >= file_->stats_.block_count)
        throw DomainError("block id " + std::to_string(block_id) + " out of bounds");
    const std::uint64_t disk_block =
        static_cast<std::uint64_t>(file_->stats_.block_capacity) * file_->record_width_ + 4;
    const std::uint64_t offset = kHeaderSize + block_id * disk_block;
    if (offset != stream_pos_) {
        if (offset > stream_pos_)
            ++io_.forward_seeks;
        else
            ++io_.backward_seeks;
        in_.clear();
        in_.seekg(static_cast<std::streamoff>(offset));
        stream_pos_ = offset;
    }
    std::vector<char> payload(disk_block - 4);
    in_.read(payload.data(), static_cast<std::streamsize>(payload.size()));
    char crc_buf[4];
    in_.read(crc_buf, 4);
    if (!in_) throw FormatError("truncated block " + std::to_string(block_id) + " in " +
                                file_->path_.string());
    stream_pos_ = offset + disk_block;
    io_.bytes_read += disk_block;

    if (payload_crc(payload) != get_u32(crc_buf))
        throw FormatError("checksum mismatch in block " + std::to_string(block_id) + " of " +
                          file_->path_.string());

    const std::uint32_t count = file_->block_size(block_id);
    std::vector<Record> records;
    records.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i)
        records.push_back(decode_record(payload.data() + i * file_->record_width_, *file_->schema_));
    return records;
}

BlockFile::Scan::Scan(const BlockFile& file, std::uint64_t from, std::uint64_t to)
    : reader_(file), next_block_(from), end_block_(to) {}

std::optional<Record> BlockFile::Scan::next() {
    while (cursor_ >= current_.size()) {
        if (next_block_ >= end_block_) return std::nullopt;
        current_ = reader_.read(next_block_++);
        cursor_ = 0;
    }
    return std::move(current_[cursor_++]);
}

BlockFile::Scan BlockFile::scan(std::uint64_t from_block, std::uint64_t to_block) const {
    if (from_block > to_block || to_block > stats_.block_count)
        throw DomainError("block range [" + std::to_string(from_block) + ", " +
                          std::to_string(to_block) + ") out of bounds for " +
                          std::to_string(stats_.block_count) + " blocks");
    return Scan(*this, from_block, to_block);
}

std::vector<Record> BlockFile::read_block(std::uint64_t block_id) const {
    if (block_id >= stats_.block_count)
        throw DomainError("block id " + std::to_string(block_id) + " out of bounds");
    auto cur = scan(block_id, block_id + 1);
    std::vector<Record> out;
    out.reserve(block_size(block_id));
    while (auto r = cur.next()) out.push_back(std::move(*r));
    return out;
}

std::vector<Record> BlockFile::read_all() const {
    auto cur = scan(0, stats_.block_count);
    std::vector<Record> out;
    out.reserve(stats_.record_count);
    while (auto r = cur.next()) out.push_back(std::move(*r));
    return out;
}

}  // namespace gcube
