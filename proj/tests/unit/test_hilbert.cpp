#include <algorithm>
#include <cstdlib>
#include <map>
#include <numeric>

#include "doctest.h"
#include "gcube/error.hpp"
#include "gcube/grid.hpp"
#include "gcube/hilbert.hpp"
#include "helpers.hpp"

using namespace gcube;

namespace {

std::vector<std::uint64_t> nth_cell(std::uint64_t n, int d, int k) {
    std::vector<std::uint64_t> c(d);
    const std::uint64_t side = 1ull << k;
    for (int i = 0; i < d; ++i) {
        c[i] = n % side;
        n /= side;
    }
    return c;
}

}  // namespace

TEST_CASE("hilbert_rank: order-1 curve in 2d visits (0,0),(0,1),(1,1),(1,0)") {
    const std::uint64_t cells[4][2] = {{0, 0}, {0, 1}, {1, 1}, {1, 0}};
    for (int r = 0; r < 4; ++r)
        CHECK((hilbert_rank(std::span<const std::uint64_t>(cells[r], 2), 1) == r));
}

TEST_CASE("hilbert_rank: origin has rank 0 in any dimension at any resolution") {
    for (std::size_t d : {1u, 2u, 3u, 4u, 6u}) {
        const std::vector<std::uint64_t> origin(d, 0);
        for (int k : {1, 5, 10, 53}) CHECK((hilbert_rank(origin, k) == 0));
    }
}

TEST_CASE("hilbert_rank: bijection and grid adjacency, exhaustive at small sizes") {
    for (int d = 1; d <= 3; ++d) {
        for (int k = 1; k <= (d == 3 ? 5 : 6); ++k) {
            std::uint64_t total = 1;
            for (int i = 0; i < d; ++i) total <<= k;
            std::map<RankInt, std::vector<std::uint64_t>> by_rank;
            for (std::uint64_t n = 0; n < total; ++n) {
                const auto cell = nth_cell(n, d, k);
                const RankInt rank = hilbert_rank(cell, k);
                REQUIRE((rank >= 0));
                REQUIRE((rank < RankInt(total)));
                REQUIRE(by_rank.emplace(rank, cell).second);  // injective
            }
            REQUIRE(by_rank.size() == total);  // onto [0, 2^(d*k))
            const std::vector<std::uint64_t>* prev = nullptr;
            for (const auto& [rank, cell] : by_rank) {
                if (prev) {
                    std::uint64_t manhattan = 0;
                    for (int i = 0; i < d; ++i)
                        manhattan += (*prev)[i] > cell[i] ? (*prev)[i] - cell[i]
                                                          : cell[i] - (*prev)[i];
                    REQUIRE(manhattan == 1);  // consecutive ranks are neighbors
                }
                prev = &cell;
            }
        }
    }
}

TEST_CASE("hilbert_rank / hilbert_cells are inverse, including wide ranks") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const int d = 1 + static_cast<int>(rng() % 8);
        const int k = 1 + static_cast<int>(rng() % 53);
        std::vector<std::uint64_t> cell(d);
        for (auto& c : cell) c = rng() & ((std::uint64_t{1} << k) - 1);
        const RankInt rank = hilbert_rank(cell, k);
        CHECK(hilbert_cells(rank, k, d) == cell);
    }
}

TEST_CASE("order preservation under refinement: rank(k+1) div 2^d == rank(k)") {
    // exhaustive at small sizes
    for (int d = 2; d <= 3; ++d) {
        for (int k = 1; k <= (d == 3 ? 4 : 5); ++k) {
            std::uint64_t total = 1;
            for (int i = 0; i < d; ++i) total <<= (k + 1);
            for (std::uint64_t n = 0; n < total; ++n) {
                const auto cell = nth_cell(n, d, k + 1);
                std::vector<std::uint64_t> parent(cell.size());
                for (std::size_t i = 0; i < cell.size(); ++i) parent[i] = cell[i] >> 1;
                REQUIRE((hilbert_rank(cell, k + 1) >> d == hilbert_rank(parent, k)));
            }
        }
    }
    // random spot checks at depth
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 2 + static_cast<int>(rng() % 5);
        const int k = 10 + static_cast<int>(rng() % 42);
        std::vector<std::uint64_t> cell(d);
        for (auto& c : cell) c = rng() & ((std::uint64_t{1} << k) - 1);
        std::vector<std::uint64_t> parent(cell.size());
        for (std::size_t i = 0; i < cell.size(); ++i) parent[i] = cell[i] >> 1;
        CHECK((hilbert_rank(cell, k) >> d == hilbert_rank(parent, k - 1)));
    }
}

TEST_CASE("hilbert_rank rejects out-of-range coordinates") {
    const std::vector<std::uint64_t> cell{4, 0};
    CHECK_THROWS_AS(hilbert_rank(cell, 2), DomainError);  // 4 >= 2^2
    CHECK_THROWS_AS(hilbert_rank(cell, 0), DomainError);
    CHECK_THROWS_AS(hilbert_rank(cell, 54), DomainError);
    CHECK_THROWS_AS(hilbert_cells(RankInt(16), 2, 2), DomainError);  // 16 >= 2^4
    CHECK_THROWS_AS(hilbert_cells(RankInt(-1), 2, 2), DomainError);
}

TEST_CASE("hilbert_compare: equal keys return Equal without touching k") {
    const auto schema = testutil::mixed_schema();
    const Record a(schema, {3.0, 0.25, 1.0}, {1.0, 2.0});
    const Record b(schema, {3.0, 0.25, 1.0}, {9.0, 9.0});  // measures differ, key equal
    int k = 6;
    CHECK(hilbert_compare(a, b, k, schema) == Ordering::equal);
    CHECK(k == 6);
}

TEST_CASE("hilbert_compare: shared cell at k=6 separating at bit 9 advances k to 9") {
    const auto schema = testutil::continuous_schema(2, 0);
    // fractions agree in their first 8 bits and differ at bit 9
    const Record a(schema, {0.5, 0.125}, {});
    const Record b(schema, {0.5 + 0x1.0p-9, 0.125}, {});
    int k = 6;
    const Ordering ord = hilbert_compare(a, b, k, schema);
    CHECK(k == 9);
    CHECK(ord != Ordering::equal);
    // caches refreshed at the final k
    REQUIRE(a.cached_rank.has_value());
    REQUIRE(b.cached_rank.has_value());
    CHECK(a.cached_rank->resolution == 9);
    CHECK(b.cached_rank->resolution == 9);
    CHECK((a.cached_rank->bits == hilbert_rank(cell_coords(a, schema, 9), 9)));
}

TEST_CASE("hilbert_compare: antisymmetry and k monotonicity") {
    const auto schema = testutil::mixed_schema();
    const auto records = testutil::random_records(schema, 60, 99);
    int k = initial_resolution(schema);
    for (std::size_t i = 0; i < records.size(); ++i) {
        for (std::size_t j = i + 1; j < records.size(); ++j) {
            const int k_before = k;
            const Ordering ab = hilbert_compare(records[i], records[j], k, schema);
            CHECK(k >= k_before);
            int k2 = k;
            const Ordering ba = hilbert_compare(records[j], records[i], k2, schema);
            CHECK(k2 == k);  // already separated
            CHECK(static_cast<int>(ab) == -static_cast<int>(ba));
        }
    }
}

TEST_CASE("hilbert_compare: cache on/off agree") {
    const auto schema = testutil::mixed_schema();
    const auto records = testutil::random_records(schema, 40, 123);
    int k1 = initial_resolution(schema);
    int k2 = k1;
    for (std::size_t i = 0; i + 1 < records.size(); ++i) {
        const auto cached = hilbert_compare(records[i], records[i + 1], k1, schema, true);
        const auto fresh = hilbert_compare(records[i], records[i + 1], k2, schema, false);
        CHECK(cached == fresh);
        CHECK(k1 == k2);
    }
}

TEST_CASE("hilbert_sort: empty input keeps the initial resolution") {
    const auto schema = testutil::mixed_schema();
    std::vector<Record> records;
    CHECK(hilbert_sort(records, schema) == initial_resolution(schema));
    CHECK(records.empty());
}

TEST_CASE("hilbert_sort: disabling the rank cache changes nothing observable") {
    const auto schema = testutil::mixed_schema();
    auto cached = testutil::random_records(schema, 600, 19);
    auto fresh = cached;
    const int k_cached = hilbert_sort(cached, schema);
    const int k_fresh = hilbert_sort(fresh, schema, SortOptions{.use_rank_cache = false});
    CHECK(k_cached == k_fresh);
    CHECK(testutil::same_sequence(cached, fresh));
    for (const auto& r : fresh) CHECK(!r.cached_rank.has_value());
}

TEST_CASE("hilbert_sort: idempotent") {
    const auto schema = testutil::mixed_schema();
    auto records = testutil::random_records(schema, 500, 17);
    hilbert_sort(records, schema);
    const auto once = records;
    hilbert_sort(records, schema);
    CHECK(testutil::same_sequence(once, records));
}

TEST_CASE("hilbert_sort: 1000 random records match the materialized-rank oracle") {
    const auto schema = testutil::mixed_schema();
    auto records = testutil::random_records(schema, 1000, 20);
    const auto input = records;
    const int k_f = hilbert_sort(records, schema);

    // independent oracle: full ranks at k_f, stable sort of input indices
    std::vector<RankInt> ranks;
    ranks.reserve(input.size());
    for (const auto& rec : input) ranks.push_back(hilbert_rank(cell_coords(rec, schema, k_f), k_f));
    std::vector<std::size_t> order(input.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return ranks[a] < ranks[b]; });

    for (std::size_t i = 0; i < order.size(); ++i) {
        CHECK(records[i].coords() == input[order[i]].coords());
        CHECK(records[i].measures() == input[order[i]].measures());
    }
}

TEST_CASE("hilbert_sort: equal keys stay adjacent in input order") {
    const auto schema = testutil::continuous_schema(2, 1);
    std::vector<Record> records;
    records.emplace_back(schema, std::vector<double>{0.9, 0.9}, std::vector<double>{0.0});
    records.emplace_back(schema, std::vector<double>{0.5, 0.5}, std::vector<double>{1.0});
    records.emplace_back(schema, std::vector<double>{0.5, 0.5}, std::vector<double>{2.0});
    records.emplace_back(schema, std::vector<double>{0.1, 0.1}, std::vector<double>{3.0});
    records.emplace_back(schema, std::vector<double>{0.5, 0.5}, std::vector<double>{4.0});
    hilbert_sort(records, schema);
    std::vector<double> dup_measures;
    for (const auto& r : records)
        if (r.coord(0) == 0.5) dup_measures.push_back(r.measure(0));
    CHECK(dup_measures == std::vector<double>{1.0, 2.0, 4.0});
}

TEST_CASE("comparator totality: sorted order is transitive-consistent") {
    const auto schema = testutil::continuous_schema(3, 0);
    auto records = testutil::random_records(schema, 80, 31);
    int k = hilbert_sort(records, schema);
    for (std::size_t i = 0; i < records.size(); ++i)
        for (std::size_t j = i + 1; j < records.size(); ++j) {
            const Ordering ord = hilbert_compare(records[i], records[j], k, schema);
            CHECK((ord == Ordering::less || ord == Ordering::equal));
        }
}
