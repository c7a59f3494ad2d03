// Pins the on-disk encodings byte for byte. If one of these hashes moves,
// the format changed and the file version must be bumped.

#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gcube/block_store.hpp"
#include "gcube/hilbert.hpp"
#include "gcube/index_tree.hpp"
#include "helpers.hpp"

using namespace gcube;

namespace {

std::uint64_t fnv1a_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::uint64_t h = 0xcbf29ce484222325ull;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace

TEST_CASE("golden files: block and index encodings are frozen") {
    const Schema schema({testutil::cat("c", 3), testutil::cont("x", 0.0, 1.0)}, {"m"});
    std::vector<Record> records;
    const double xs[] = {0.125, 0.875, 0.5, 0.25, 0.75};
    for (int i = 0; i < 5; ++i)
        records.emplace_back(schema, std::vector<double>{static_cast<double>(i % 3), xs[i]},
                             std::vector<double>{static_cast<double>(10 * i)});
    const int k = hilbert_sort(records, schema);
    REQUIRE(k == 3);  // the two cat=1 records share a cell at k=2

    testutil::TempDir tmp("golden");
    write_sorted(records, schema, 2, k, tmp.path() / "d.gcub");
    const auto blocks = BlockFile::open(tmp.path() / "d.gcub", schema);
    IndexTree::build(blocks, schema, 2).save(tmp.path() / "i.gidx");

    CHECK(fnv1a_file(tmp.path() / "d.gcub") == 0xae221a376609196full);
    CHECK(fnv1a_file(tmp.path() / "i.gidx") == 0x9d5d4afb690a04bbull);
}
