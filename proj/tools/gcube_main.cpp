// gcube: build, query, update and benchmark Hilbert-ordered OLAP views.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "gcube/baseline.hpp"
#include "gcube/bench.hpp"
#include "gcube/block_store.hpp"
#include "gcube/error.hpp"
#include "gcube/generator.hpp"
#include "gcube/hilbert.hpp"
#include "gcube/ingest.hpp"
#include "gcube/query.hpp"
#include "gcube/view.hpp"

namespace {

using nlohmann::json;

struct GenFlags {
    std::string preset = "default";
    std::uint64_t n = 10000;
    std::size_t d_cat = 2;
    std::size_t d_cont = 2;
    std::uint32_t cardinality = 64;
    std::uint32_t distinct = 1000;
    std::size_t measures = 2;
    std::string dist = "uniform";
    std::uint64_t seed = 1;

    gcube::GenConfig to_config() const {
        const auto d = dist == "clustered" ? gcube::GenDist::clustered : gcube::GenDist::uniform;
        gcube::GenConfig config;
        if (preset == "hydro-like") {
            config = gcube::GenConfig::hydro_like(n, seed, d);
        } else {
            config = gcube::GenConfig::synthetic(d_cat, d_cont, n, seed, d, cardinality, distinct);
        }
        config.measure_count = measures;
        return config;
    }

    void attach(CLI::App* cmd) {
        cmd->add_option("--preset", preset, "dataset preset: default | hydro-like")
            ->check(CLI::IsMember({"default", "hydro-like"}));
        cmd->add_option("--n", n, "number of records");
        cmd->add_option("--d-cat", d_cat, "categorical dimensions (default preset)");
        cmd->add_option("--d-cont", d_cont, "continuous dimensions (default preset)");
        cmd->add_option("--cardinality", cardinality, "categorical cardinality (default preset)");
        cmd->add_option("--distinct", distinct, "distinct continuous values (default preset)");
        cmd->add_option("--measures", measures, "number of measures");
        cmd->add_option("--dist", dist, "value distribution: uniform | clustered")
            ->check(CLI::IsMember({"uniform", "clustered"}));
        cmd->add_option("--seed", seed, "generator seed");
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw gcube::IoError("cannot open " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

json stats_json(const gcube::View& view) {
    const auto blocks = view.blocks();
    const auto index = view.index();
    const auto& meta = view.meta();
    return json{{"n", meta.record_count},
                {"block_capacity", meta.block_capacity},
                {"fanout", meta.fanout},
                {"resolution", meta.resolution},
                {"schema_digest", meta.schema_digest},
                {"built_at", meta.built_at},
                {"generation", meta.generation},
                {"block_count", blocks.block_count()},
                {"tree_height", index.height()},
                {"level_node_counts", index.level_node_counts()},
                {"mean_sibling_overlap", index.mean_sibling_overlap(view.schema())}};
}

int run(int argc, char** argv) {
    CLI::App app{"Hilbert-ordered storage and indexing for mixed categorical/continuous views"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset CSV + schema");
    GenFlags gen_flags;
    gen_flags.attach(gen);
    std::string gen_out = "data.csv";
    std::string gen_schema_out = "schema.json";
    gen->add_option("--out", gen_out, "output CSV path");
    gen->add_option("--schema-out", gen_schema_out, "output schema path");

    // build
    auto* build = app.add_subcommand("build", "build a view from a CSV");
    std::string build_csv, build_schema, build_out;
    std::uint32_t build_block = gcube::default_block_capacity;
    std::uint32_t build_fanout = gcube::default_fanout;
    build->add_option("--csv", build_csv, "input CSV")->required();
    build->add_option("--schema", build_schema, "schema JSON")->required();
    build->add_option("--out", build_out, "view directory")->required();
    build->add_option("--block-size", build_block, "records per block (B)");
    build->add_option("--fanout", build_fanout, "index fanout (F)");

    // query
    auto* query = app.add_subcommand("query", "run a range-aggregate query");
    std::string query_dir, query_file, query_inline;
    query->add_option("view", query_dir, "view directory")->required();
    query->add_option("--query", query_file, "query JSON file");
    query->add_option("--query-json", query_inline, "inline query JSON");

    // update
    auto* update = app.add_subcommand("update", "merge an update CSV into a view");
    std::string update_dir, update_csv, rejects_out;
    update->add_option("view", update_dir, "view directory")->required();
    update->add_option("--csv", update_csv, "update CSV")->required();
    update->add_option("--rejects", rejects_out, "write rejected-row report JSON here");

    // stats
    auto* stats = app.add_subcommand("stats", "print view statistics");
    std::string stats_dir;
    stats->add_option("view", stats_dir, "view directory")->required();

    // bench
    auto* bench = app.add_subcommand("bench", "compare adaptive vs pre-discretization, merge vs rebuild");
    std::string bench_view, bench_phases = "sort,query,update", bench_work = "gcube-bench-work";
    std::size_t bench_queries_n = 1000;
    double bench_frac = 0.02;
    int bench_repeats = 5, bench_conc = 1;
    std::uint64_t bench_seed = 7;
    GenFlags bench_gen;
    bench->add_option("--view", bench_view, "existing view directory (otherwise one is generated)");
    bench_gen.attach(bench);
    bench->add_option("--phases", bench_phases, "comma list from: sort,query,update");
    bench->add_option("--queries", bench_queries_n, "random queries for the query phase");
    bench->add_option("--update-frac", bench_frac, "update batch size as a fraction of N");
    bench->add_option("--repeats", bench_repeats, "repetitions per timed phase");
    bench->add_option("--concurrency", bench_conc, "concurrent query readers");
    bench->add_option("--bench-seed", bench_seed, "workload seed");
    bench->add_option("--work-dir", bench_work, "scratch directory");

    CLI11_PARSE(app, argc, argv);

    if (*gen) {
        gcube::generate_csv(gen_flags.to_config(), gen_out, gen_schema_out);
        std::cerr << "wrote " << gen_out << " and " << gen_schema_out << "\n";
        return 0;
    }

    if (*build) {
        const auto s = gcube::View::build(build_csv, build_schema, build_out, build_block,
                                          build_fanout);
        std::cout << "n=" << s.record_count << " k_f=" << s.resolution
                  << " blocks=" << s.block_count << " tree_height=" << s.tree_height
                  << " collapsed_duplicates=" << s.collapsed_duplicates << " build_ms="
                  << s.wall_ms << "\n";
        return 0;
    }

    if (*query) {
        if (query_file.empty() == query_inline.empty())
            throw gcube::QueryError("provide exactly one of --query or --query-json");
        const std::string text = query_inline.empty() ? read_file(query_file) : query_inline;
        const auto view = gcube::View::open(query_dir);
        const auto doc = gcube::parse_query_document(text, view.schema());
        const auto blocks = view.blocks();
        const auto index = view.index();
        const auto result = gcube::run_query_document(index, blocks, doc);
        std::cout << gcube::render_result_json(doc, result, view.schema());
        return 0;
    }

    if (*update) {
        auto view = gcube::View::open(update_dir);
        const auto report = view.update(update_csv);
        if (!rejects_out.empty()) {
            std::ofstream out(rejects_out);
            out << gcube::rejects_to_json(report.rejects);
        }
        std::cout << "batch_rows=" << report.batch_rows << " replaced=" << report.replaced
                  << " merged_total=" << report.merged_total << " rejected=" << report.rejected
                  << " k_before=" << report.resolution_before
                  << " k_after=" << report.resolution_after << " source=" << report.source
                  << " applied_at=" << report.applied_at << "\n";
        return 0;
    }

    if (*stats) {
        const auto view = gcube::View::open(stats_dir);
        std::cout << stats_json(view).dump(2) << "\n";
        return 0;
    }

    if (*bench) {
        namespace fs = std::filesystem;
        fs::create_directories(bench_work);
        std::string view_dir = bench_view;
        if (view_dir.empty()) {
            view_dir = (fs::path(bench_work) / "view").string();
            const auto config = bench_gen.to_config();
            const gcube::Schema schema = gcube::generator_schema(config);
            auto records = gcube::generate_records(config, schema);
            gcube::Dictionaries dicts = gcube::Dictionaries::empty(schema);
            char buf[16];
            for (std::size_t i = 0; i < schema.dim_count(); ++i) {
                if (schema.dimension(i).kind != gcube::DimKind::categorical) continue;
                for (std::uint32_t v = 0; v < schema.dimension(i).cardinality; ++v) {
                    std::snprintf(buf, sizeof buf, "v%03u", v);
                    dicts.per_dim[i].add(buf);
                }
            }
            const auto s = gcube::View::build_from_records(std::move(records), schema, dicts,
                                                           view_dir);
            std::cerr << "built bench view: n=" << s.record_count << " k_f=" << s.resolution
                      << " blocks=" << s.block_count << "\n";
        }
        const auto view = gcube::View::open(view_dir);

        std::cout << gcube::bench_csv_header();
        std::mt19937_64 rng(bench_seed);
        const bool do_sort = bench_phases.find("sort") != std::string::npos;
        const bool do_query = bench_phases.find("query") != std::string::npos;
        const bool do_update = bench_phases.find("update") != std::string::npos;

        if (do_sort) {
            auto records = view.blocks().read_all();
            // Unsorted input for a fair sort comparison.
            for (std::size_t i = records.size(); i > 1; --i)
                std::swap(records[i - 1], records[rng() % i]);
            const auto s = gcube::bench_sort(records, view.schema(), bench_repeats);
            std::cout << gcube::bench_csv_row(s.adaptive) << gcube::bench_csv_row(s.prediscretize);
        }
        if (do_query) {
            const auto row = gcube::bench_queries(view, bench_queries_n, bench_seed, bench_conc);
            std::cout << gcube::bench_csv_row(row);
        }
        if (do_update) {
            const auto batch = gcube::make_update_batch(view.schema(), view.blocks().read_all(),
                                                        bench_frac, bench_seed + 1);
            const auto u = gcube::bench_update(view, batch, fs::path(bench_work) / "update",
                                               bench_repeats);
            std::cout << gcube::bench_csv_row(u.merge) << gcube::bench_csv_row(u.rebuild);
        }
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const gcube::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
