#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "gcube/error.hpp"
#include "gcube/generator.hpp"
#include "gcube/query.hpp"
#include "gcube/view.hpp"
#include "helpers.hpp"

using namespace gcube;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("generator: deterministic for a fixed seed") {
    testutil::TempDir tmp("gen");
    const auto config = GenConfig::synthetic(1, 2, 500, 42, GenDist::uniform);
    generate_csv(config, tmp.path() / "a.csv", tmp.path() / "a.schema.json");
    generate_csv(config, tmp.path() / "b.csv", tmp.path() / "b.schema.json");
    CHECK(slurp(tmp.path() / "a.csv") == slurp(tmp.path() / "b.csv"));
    CHECK(slurp(tmp.path() / "a.schema.json") == slurp(tmp.path() / "b.schema.json"));

    const auto other = GenConfig::synthetic(1, 2, 500, 43, GenDist::uniform);
    generate_csv(other, tmp.path() / "c.csv", tmp.path() / "c.schema.json");
    CHECK(slurp(tmp.path() / "a.csv") != slurp(tmp.path() / "c.csv"));
}

TEST_CASE("generator: hydro-like preset hits the exact distinct-value counts") {
    const auto config = GenConfig::hydro_like(2000, 7, GenDist::clustered);
    const Schema schema = generator_schema(config);
    REQUIRE(schema.dim_count() == 6);
    const auto records = generate_records(config, schema);
    REQUIRE(records.size() == 2000);

    const std::vector<std::size_t> expected{51, 51, 56, 100, 802, 212};
    for (std::size_t d = 0; d < 6; ++d) {
        std::set<double> distinct;
        for (const auto& r : records) distinct.insert(r.coord(d));
        CHECK(distinct.size() == expected[d]);
    }
}

TEST_CASE("generator: n = 0 emits a header-only CSV") {
    testutil::TempDir tmp("gen0");
    auto config = GenConfig::synthetic(1, 1, 0, 1, GenDist::uniform);
    generate_csv(config, tmp.path() / "z.csv", tmp.path() / "z.schema.json");
    const auto text = slurp(tmp.path() / "z.csv");
    CHECK(text == "cat0,x0,m0,m1\n");
}

TEST_CASE("view: build, open, query round trip through the directory layout") {
    testutil::TempDir tmp("view");
    const auto config = GenConfig::synthetic(1, 2, 3000, 11, GenDist::uniform);
    generate_csv(config, tmp.path() / "data.csv", tmp.path() / "schema.json");

    const auto stats = View::build(tmp.path() / "data.csv", tmp.path() / "schema.json",
                                   tmp.path() / "view", 64, 8);
    CHECK(stats.record_count <= 3000);
    CHECK(stats.record_count + stats.collapsed_duplicates == 3000);
    CHECK(stats.block_count == (stats.record_count + 63) / 64);

    const View view = View::open(tmp.path() / "view");
    CHECK(view.meta().record_count == stats.record_count);
    CHECK(view.meta().generation == 1);
    CHECK(view.meta().schema_digest == view.schema().digest_hex());

    const auto blocks = view.blocks();
    const auto index = view.index();
    const auto res = range_aggregate(index, blocks, QueryRegion::unconstrained(3),
                                     {AggregateFn::count, ""});
    CHECK(res.count == stats.record_count);

    // dictionaries: first-seen dense ids, one file per categorical dim
    CHECK(std::filesystem::exists(tmp.path() / "view" / "dictionaries" / "cat0.json"));
    CHECK(view.dictionaries().per_dim[0].size() == 64);
}

TEST_CASE("view: duplicate keys in the load collapse to the last row") {
    testutil::TempDir tmp("dups");
    const Schema schema({testutil::cat("c", 4)}, {"m"});
    schema.save(tmp.path() / "schema.json");
    std::ofstream csv(tmp.path() / "data.csv");
    csv << "c,m\nred,1\nblue,2\nred,3\n";
    csv.close();

    const auto stats = View::build(tmp.path() / "data.csv", tmp.path() / "schema.json",
                                   tmp.path() / "view");
    CHECK(stats.record_count == 2);
    CHECK(stats.collapsed_duplicates == 1);

    const View view = View::open(tmp.path() / "view");
    const auto records = view.blocks().read_all();
    for (const auto& r : records)
        if (r.coord(0) == 0.0) CHECK(r.measure(0) == 3.0);  // "red" kept the last row
}

TEST_CASE("ingest: header mismatch and malformed rows") {
    testutil::TempDir tmp("ingest");
    const Schema schema({testutil::cat("c", 2), testutil::cont("x", 0.0, 1.0)}, {"m"});

    {
        std::ofstream csv(tmp.path() / "bad_header.csv");
        csv << "c,y,m\na,0.5,1\n";
    }
    Dictionaries dicts = Dictionaries::empty(schema);
    CHECK_THROWS_AS(read_csv(tmp.path() / "bad_header.csv", schema, dicts, BadRowPolicy::fail),
                    FormatError);

    {
        std::ofstream csv(tmp.path() / "rows.csv");
        csv << "c,x,m\n"
            << "a,0.5,1\n"      // ok
            << "b,1.5,1\n"      // x out of bounds
            << "c,0.5,1\n"      // third token exceeds cardinality 2
            << "a,0.25,oops\n"  // bad measure
            << "a,0.25\n"       // missing field
            << "b,0.75,2\n";    // ok
    }
    Dictionaries d2 = Dictionaries::empty(schema);
    const auto res = read_csv(tmp.path() / "rows.csv", schema, d2, BadRowPolicy::reject);
    CHECK(res.records.size() == 2);
    REQUIRE(res.rejects.size() == 4);
    CHECK(res.rejects[0].line == 3);
    CHECK(res.rejects[1].line == 4);
    CHECK(res.rejects[2].line == 5);
    CHECK(res.rejects[3].line == 6);

    const auto report = rejects_to_json(res.rejects);
    CHECK(report.find("\"line\": 3") != std::string::npos);

    Dictionaries d3 = Dictionaries::empty(schema);
    CHECK_THROWS_WITH_AS(read_csv(tmp.path() / "rows.csv", schema, d3, BadRowPolicy::fail),
                         doctest::Contains(":3:"), FormatError);
}

TEST_CASE("view update: merge semantics, rejects, atomic swap") {
    testutil::TempDir tmp("update");
    const auto config = GenConfig::synthetic(1, 1, 400, 19, GenDist::uniform);
    generate_csv(config, tmp.path() / "data.csv", tmp.path() / "schema.json");
    View::build(tmp.path() / "data.csv", tmp.path() / "schema.json", tmp.path() / "view", 32, 4);
    View view = View::open(tmp.path() / "view");
    const auto before = view.blocks().read_all();
    const auto n_before = view.meta().record_count;

    SUBCASE("empty update leaves the payload byte-identical") {
        {
            std::ofstream csv(tmp.path() / "empty.csv");
            csv << "cat0,x0,m0,m1\n";
        }
        const auto data_before = slurp(tmp.path() / "view" / "data.gcub");
        const auto report = view.update(tmp.path() / "empty.csv");
        CHECK(report.batch_rows == 0);
        CHECK(report.merged_total == n_before);
        CHECK(report.resolution_after == report.resolution_before);
        CHECK(slurp(tmp.path() / "view" / "data.gcub") == data_before);
        CHECK(View::open(tmp.path() / "view").meta().generation == 2);
    }

    SUBCASE("existing-keys-only batch keeps N, replaces measures") {
        Dictionaries dicts = view.dictionaries();
        std::vector<Record> batch;
        for (int i = 0; i < 20; ++i)
            batch.emplace_back(view.schema(), before[i * 7].coords(),
                               std::vector<double>{-7.0, -8.0});
        write_csv(tmp.path() / "batch.csv", view.schema(), batch, dicts);
        const auto report = view.update(tmp.path() / "batch.csv");
        CHECK(report.replaced == 20);
        CHECK(report.merged_total == n_before);
        const View after = View::open(tmp.path() / "view");
        CHECK(after.meta().record_count == n_before);
        std::size_t hit = 0;
        for (const auto& r : after.blocks().read_all())
            if (r.measure(0) == -7.0) ++hit;
        CHECK(hit == 20);
    }

    SUBCASE("out-of-bounds and over-cardinality rows are rejected per line") {
        {
            std::ofstream csv(tmp.path() / "mixed.csv");
            csv << "cat0,x0,m0,m1\n"
                << "v001,250.0,1,1\n"      // fine
                << "v002,5000.0,1,1\n"     // x0 beyond hi=1000
                << "zz999,250.0,1,1\n";    // cardinality 64 already full
        }
        const auto report = view.update(tmp.path() / "mixed.csv");
        CHECK(report.batch_rows == 1);
        CHECK(report.rejected == 2);
        CHECK(report.rejects[0].line == 3);
        CHECK(report.rejects[1].line == 4);
        CHECK(View::open(tmp.path() / "view").meta().record_count == n_before + 1);
    }

    SUBCASE("duplicate keys inside one batch: last row wins") {
        {
            std::ofstream csv(tmp.path() / "dup.csv");
            csv << "cat0,x0,m0,m1\n"
                << "v001,977.125,10,10\n"
                << "v001,977.125,20,20\n";
        }
        const auto report = view.update(tmp.path() / "dup.csv");
        CHECK(report.batch_rows == 1);
        const auto records = View::open(tmp.path() / "view").blocks().read_all();
        for (const auto& r : records)
            if (r.coord(1) == 977.125) CHECK(r.measure(0) == 20.0);
    }

    SUBCASE("stale lock file blocks updates") {
        {
            std::ofstream lock(tmp.path() / "view" / ".lock");
            lock << "held\n";
        }
        {
            std::ofstream csv(tmp.path() / "any.csv");
            csv << "cat0,x0,m0,m1\n";
        }
        CHECK_THROWS_AS(view.update(tmp.path() / "any.csv"), IoError);
        std::filesystem::remove(tmp.path() / "view" / ".lock");
    }
}

TEST_CASE("view: rebuild_with_batch equals the merge path") {
    testutil::TempDir tmp("rebuild");
    const auto config = GenConfig::synthetic(1, 2, 1500, 23, GenDist::clustered);
    generate_csv(config, tmp.path() / "data.csv", tmp.path() / "schema.json");
    View::build(tmp.path() / "data.csv", tmp.path() / "schema.json", tmp.path() / "view", 64, 8);
    View view = View::open(tmp.path() / "view");

    const auto batch = make_update_batch(view.schema(), view.blocks().read_all(), 0.02, 99);
    view.rebuild_with_batch(batch, tmp.path() / "rebuilt");

    write_csv(tmp.path() / "batch.csv", view.schema(), batch, view.dictionaries());
    view.update(tmp.path() / "batch.csv");

    const View merged = View::open(tmp.path() / "view");
    const View rebuilt = View::open(tmp.path() / "rebuilt");
    CHECK(merged.meta().record_count == rebuilt.meta().record_count);
    CHECK(testutil::same_sequence(merged.blocks().read_all(), rebuilt.blocks().read_all()));
}

TEST_CASE("view: empty CSV builds an empty view that answers and absorbs updates") {
    testutil::TempDir tmp("emptyview");
    const Schema schema({testutil::cat("c", 4), testutil::cont("x", 0.0, 1.0)}, {"m"});
    schema.save(tmp.path() / "schema.json");
    {
        std::ofstream csv(tmp.path() / "data.csv");
        csv << "c,x,m\n";
    }
    const auto stats = View::build(tmp.path() / "data.csv", tmp.path() / "schema.json",
                                   tmp.path() / "view");
    CHECK(stats.record_count == 0);
    CHECK(stats.block_count == 0);

    View view = View::open(tmp.path() / "view");
    const auto blocks = view.blocks();
    const auto index = view.index();
    const auto res = range_aggregate(index, blocks, QueryRegion::unconstrained(2),
                                     {AggregateFn::count, ""});
    CHECK(res.count == 0);
    CHECK(res.empty_region);
    CHECK(res.nodes_visited == 0);

    // first real rows arrive as an update into the empty view
    {
        std::ofstream csv(tmp.path() / "first.csv");
        csv << "c,x,m\nred,0.5,1\nblue,0.25,2\n";
    }
    const auto report = view.update(tmp.path() / "first.csv");
    CHECK(report.merged_total == 2);
    CHECK(report.replaced == 0);
    CHECK(View::open(tmp.path() / "view").meta().record_count == 2);
}

TEST_CASE("ingest: non-finite numbers are rejected at the door") {
    testutil::TempDir tmp("nonfinite");
    const Schema schema({testutil::cont("x", 0.0, 1.0)}, {"m"});
    {
        std::ofstream csv(tmp.path() / "rows.csv");
        csv << "x,m\n0.5,inf\n0.5,nan\n0.25,1.0\n";
    }
    Dictionaries dicts = Dictionaries::empty(schema);
    const auto res = read_csv(tmp.path() / "rows.csv", schema, dicts, BadRowPolicy::reject);
    CHECK(res.records.size() == 1);
    CHECK(res.rejects.size() == 2);
}

TEST_CASE("view: torn generation is detected at open") {
    testutil::TempDir tmp("torn");
    const auto config = GenConfig::synthetic(1, 1, 200, 29, GenDist::uniform);
    generate_csv(config, tmp.path() / "data.csv", tmp.path() / "schema.json");
    View::build(tmp.path() / "data.csv", tmp.path() / "schema.json", tmp.path() / "view");

    // swap in a block file with different contents than meta/index claim
    const auto other = GenConfig::synthetic(1, 1, 100, 30, GenDist::uniform);
    generate_csv(other, tmp.path() / "other.csv", tmp.path() / "other.schema.json");
    View::build(tmp.path() / "other.csv", tmp.path() / "schema.json", tmp.path() / "view2");
    std::filesystem::copy_file(tmp.path() / "view2" / "data.gcub",
                               tmp.path() / "view" / "data.gcub",
                               std::filesystem::copy_options::overwrite_existing);
    CHECK_THROWS_AS(View::open(tmp.path() / "view"), FormatError);
}
