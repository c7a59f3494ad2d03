#include <fstream>

#include "doctest.h"
#include "gcube/block_store.hpp"
#include "gcube/error.hpp"
#include "gcube/grid.hpp"
#include "gcube/hilbert.hpp"
#include "helpers.hpp"

using namespace gcube;

namespace {

std::vector<Record> sorted_records(const Schema& schema, std::size_t n, std::uint64_t seed) {
    auto records = testutil::random_records(schema, n, seed);
    hilbert_sort(records, schema);
    return records;
}

}  // namespace

TEST_CASE("write_sorted: 10 records at B=4 make blocks of 4,4,2") {
    const auto schema = testutil::mixed_schema();
    const auto records = sorted_records(schema, 10, 1);
    testutil::TempDir tmp("blocks");
    const auto path = tmp.path() / "data.gcub";
    write_sorted(records, schema, 4, 6, path);

    const auto stats = block_stats(path);
    CHECK(stats.record_count == 10);
    CHECK(stats.block_capacity == 4);
    CHECK(stats.block_count == 3);
    CHECK(stats.resolution == 6);

    const auto file = BlockFile::open(path, schema);
    CHECK(file.block_size(0) == 4);
    CHECK(file.block_size(1) == 4);
    CHECK(file.block_size(2) == 2);
}

TEST_CASE("write_sorted: empty input produces a header-only file") {
    const auto schema = testutil::mixed_schema();
    testutil::TempDir tmp("empty");
    const auto path = tmp.path() / "data.gcub";
    write_sorted({}, schema, 8, initial_resolution(schema), path);
    const auto stats = block_stats(path);
    CHECK(stats.record_count == 0);
    CHECK(stats.block_count == 0);
    CHECK(stats.resolution == initial_resolution(schema));
    const auto file = BlockFile::open(path, schema);
    auto scan = file.scan(0, 0);
    CHECK(!scan.next());
}

TEST_CASE("round trip: scan(write(R)) == R, bit exact") {
    const auto schema = testutil::mixed_schema();
    std::mt19937_64 seeds(9);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = seeds() % 300;
        const std::uint32_t b = 1 + static_cast<std::uint32_t>(seeds() % 17);
        auto records = testutil::random_records(schema, n, seeds());
        const int k = hilbert_sort(records, schema);
        testutil::TempDir tmp("roundtrip");
        const auto path = tmp.path() / "data.gcub";
        write_sorted(records, schema, b, k, path);
        const auto back = BlockFile::open(path, schema).read_all();
        REQUIRE(testutil::same_sequence(records, back));
    }
}

TEST_CASE("write_sorted: unsorted input names the offending pair") {
    const auto schema = testutil::mixed_schema();
    auto records = sorted_records(schema, 20, 3);
    std::swap(records.front(), records.back());
    testutil::TempDir tmp("unsorted");
    CHECK_THROWS_AS(write_sorted(records, schema, 4, 6, tmp.path() / "x.gcub"), OrderError);
    try {
        write_sorted(records, schema, 4, 6, tmp.path() / "x.gcub");
    } catch (const OrderError& e) {
        CHECK(std::string(e.what()).find("index") != std::string::npos);
    }
}

TEST_CASE("write_sorted: used I/O is purely sequential") {
    const auto schema = testutil::mixed_schema();
    const auto records = sorted_records(schema, 100, 5);
    testutil::TempDir tmp("seq");
    IoCounters io;
    write_sorted(records, schema, 16, 6, tmp.path() / "data.gcub", &io);
    CHECK(io.backward_seeks == 0);
    CHECK(io.forward_seeks == 0);
    CHECK(io.bytes_written > 0);
}

TEST_CASE("scan: range validation and partial ranges") {
    const auto schema = testutil::mixed_schema();
    const auto records = sorted_records(schema, 50, 7);
    testutil::TempDir tmp("ranges");
    const auto path = tmp.path() / "data.gcub";
    write_sorted(records, schema, 8, 6, path);
    const auto file = BlockFile::open(path, schema);
    REQUIRE(file.block_count() == 7);

    CHECK_THROWS_AS(file.scan(0, 8), DomainError);
    CHECK_THROWS_AS(file.scan(5, 3), DomainError);

    auto scan = file.scan(2, 4);  // records 16..31
    std::vector<Record> got;
    while (auto r = scan.next()) got.push_back(std::move(*r));
    REQUIRE(got.size() == 16);
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(got[i].coords() == records[16 + i].coords());
    CHECK(scan.io().backward_seeks == 0);
}

TEST_CASE("corruption: tampered magic and payload are both detected") {
    const auto schema = testutil::mixed_schema();
    const auto records = sorted_records(schema, 40, 11);
    testutil::TempDir tmp("corrupt");
    const auto path = tmp.path() / "data.gcub";
    write_sorted(records, schema, 8, 6, path);

    SUBCASE("magic") {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(0);
        f.write("XXXX", 4);
        f.close();
        CHECK_THROWS_AS(block_stats(path), FormatError);
        CHECK_THROWS_AS(BlockFile::open(path, schema), FormatError);
    }
    SUBCASE("payload byte flip fails the checksum") {
        {
            std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
            f.seekp(48 + 5);  // inside block 0
            char byte;
            f.seekg(48 + 5);
            f.read(&byte, 1);
            byte ^= 0x40;
            f.seekp(48 + 5);
            f.write(&byte, 1);
        }
        const auto file = BlockFile::open(path, schema);
        auto scan = file.scan(0, file.block_count());
        CHECK_THROWS_WITH_AS(
            [&] { while (scan.next()) {} }(),
            doctest::Contains("checksum"), FormatError);
    }
    SUBCASE("wrong schema digest") {
        const auto other = testutil::continuous_schema(3, 2);
        CHECK_THROWS_AS(BlockFile::open(path, other), FormatError);
    }
}

TEST_CASE("scan: two interleaved cursors over disjoint ranges do not disturb each other") {
    const auto schema = testutil::mixed_schema();
    const auto records = sorted_records(schema, 96, 14);
    testutil::TempDir tmp("interleave");
    const auto path = tmp.path() / "data.gcub";
    write_sorted(records, schema, 8, 6, path);
    const auto file = BlockFile::open(path, schema);

    auto low = file.scan(0, 6);    // records 0..47
    auto high = file.scan(6, 12);  // records 48..95
    for (std::size_t i = 0; i < 48; ++i) {
        const auto a = low.next();
        const auto b = high.next();
        REQUIRE(a);
        REQUIRE(b);
        CHECK(a->coords() == records[i].coords());
        CHECK(b->coords() == records[48 + i].coords());
    }
    CHECK(!low.next());
    CHECK(!high.next());
}

TEST_CASE("reader: seek directions are counted") {
    const auto schema = testutil::mixed_schema();
    const auto records = sorted_records(schema, 64, 13);
    testutil::TempDir tmp("seeks");
    const auto path = tmp.path() / "data.gcub";
    write_sorted(records, schema, 8, 6, path);
    const auto file = BlockFile::open(path, schema);

    auto reader = file.reader();
    reader.read(0);  // one forward seek past the header
    reader.read(1);  // contiguous: no seek
    CHECK(reader.io().forward_seeks == 1);
    reader.read(5);  // skip ahead
    CHECK(reader.io().forward_seeks == 2);
    CHECK(reader.io().backward_seeks == 0);
    reader.read(2);  // go back
    CHECK(reader.io().backward_seeks == 1);
}
