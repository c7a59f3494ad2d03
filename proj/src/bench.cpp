#include "gcube/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>
#include <thread>

#include "gcube/baseline.hpp"
#include "gcube/error.hpp"
#include "gcube/generator.hpp"
#include "gcube/hilbert.hpp"
#include "gcube/ingest.hpp"
#include "gcube/query.hpp"

namespace gcube {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct LatencyStats {
    double mean = 0.0, median = 0.0, p99 = 0.0;
};

LatencyStats summarize(std::vector<double> samples) {
    LatencyStats s;
    if (samples.empty()) return s;
    std::sort(samples.begin(), samples.end());
    double total = 0.0;
    for (double v : samples) total += v;
    s.mean = total / static_cast<double>(samples.size());
    s.median = samples[samples.size() / 2];
    s.p99 = samples[std::min(samples.size() - 1,
                             static_cast<std::size_t>(static_cast<double>(samples.size()) * 0.99))];
    return s;
}

std::string fmt(double v) {
    if (v < 0) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

bool same_order(const std::vector<Record>& a, const std::vector<Record>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].coords() != b[i].coords() || a[i].measures() != b[i].measures()) return false;
    return true;
}

void clear_caches(std::vector<Record>& records) {
    for (auto& r : records) r.cached_rank.reset();
}

}  // namespace

std::string bench_csv_header() {
    return "method,phase,repeats,time_ms_mean,time_ms_median,time_ms_p99,nodes_visited,"
           "blocks_read,extra\n";
}

std::string bench_csv_row(const BenchRow& row) {
    std::string out = row.method + "," + row.phase + "," + std::to_string(row.repeats) + "," +
                      fmt(row.time_ms_mean) + "," + fmt(row.time_ms_median) + "," +
                      fmt(row.time_ms_p99) + "," + fmt(row.nodes_visited) + "," +
                      fmt(row.blocks_read) + "," + row.extra;
    out += "\n";
    return out;
}

SortBench bench_sort(const std::vector<Record>& records, const Schema& schema, int repeats) {
    SortBench bench;

    // Correctness first: both methods must order the data identically.
    std::vector<Record> adaptive = records;
    bench.adaptive_resolution = hilbert_sort(adaptive, schema);
    bench.static_resolution = required_static_resolution(records, schema);
    const std::vector<Record> pre = prediscretize_sort(records, schema, bench.static_resolution);
    bench.order_agreement = same_order(adaptive, pre);
    if (!bench.order_agreement)
        throw Error("adaptive and pre-discretization sorts disagree on record order");

    std::vector<double> adaptive_ms, pre_ms;
    for (int r = 0; r < repeats; ++r) {
        std::vector<Record> work = records;
        clear_caches(work);
        const auto t0 = Clock::now();
        hilbert_sort(work, schema);
        adaptive_ms.push_back(ms_since(t0));
    }
    for (int r = 0; r < repeats; ++r) {
        std::vector<Record> work = records;
        clear_caches(work);
        const auto t0 = Clock::now();
        const int k_s = required_static_resolution(work, schema);
        prediscretize_sort(std::move(work), schema, k_s);
        pre_ms.push_back(ms_since(t0));
    }

    const auto a = summarize(adaptive_ms);
    bench.adaptive = {"adaptive", "sort", repeats, a.mean, a.median, a.p99, -1, -1,
                      "k_f=" + std::to_string(bench.adaptive_resolution)};
    const auto p = summarize(pre_ms);
    bench.prediscretize = {"prediscretize", "sort", repeats, p.mean, p.median, p.p99, -1, -1,
                           "k_s=" + std::to_string(bench.static_resolution)};
    return bench;
}

BenchRow bench_queries(const View& view, std::size_t num_queries, std::uint64_t seed,
                       int concurrency) {
    const Schema& schema = view.schema();
    const IndexTree index = view.index();

    std::mt19937_64 rng(seed);
    std::vector<QueryRegion> regions;
    regions.reserve(num_queries);
    for (std::size_t i = 0; i < num_queries; ++i) regions.push_back(random_region(schema, rng));
    std::vector<AggregateRequest> requests;
    requests.reserve(num_queries);
    const AggregateFn fns[] = {AggregateFn::count, AggregateFn::sum, AggregateFn::avg,
                               AggregateFn::min, AggregateFn::max};
    for (std::size_t i = 0; i < num_queries; ++i) {
        AggregateRequest req;
        req.fn = fns[rng() % 5];
        if (req.fn != AggregateFn::count && schema.measure_count() > 0)
            req.measure = schema.measures()[rng() % schema.measure_count()];
        else
            req.fn = AggregateFn::count;
        requests.push_back(std::move(req));
    }

    concurrency = std::max(concurrency, 1);
    std::vector<std::vector<double>> latencies(concurrency);
    std::vector<double> nodes(concurrency, 0.0), blocks_read(concurrency, 0.0);
    std::vector<std::thread> workers;
    for (int w = 0; w < concurrency; ++w) {
        workers.emplace_back([&, w] {
            const BlockFile blocks = view.blocks();  // private handle per reader
            for (std::size_t i = w; i < num_queries; i += static_cast<std::size_t>(concurrency)) {
                const auto t0 = Clock::now();
                const QueryResult res = range_aggregate(index, blocks, regions[i], requests[i]);
                latencies[w].push_back(ms_since(t0));
                nodes[w] += static_cast<double>(res.nodes_visited);
                blocks_read[w] += static_cast<double>(res.blocks_read);
            }
        });
    }
    for (auto& t : workers) t.join();

    std::vector<double> all;
    double total_nodes = 0.0, total_blocks = 0.0;
    for (int w = 0; w < concurrency; ++w) {
        all.insert(all.end(), latencies[w].begin(), latencies[w].end());
        total_nodes += nodes[w];
        total_blocks += blocks_read[w];
    }
    const auto s = summarize(all);
    const double q = static_cast<double>(std::max<std::size_t>(num_queries, 1));
    return {"gcube",        "query",          static_cast<int>(num_queries),
            s.mean,         s.median,         s.p99,
            total_nodes / q, total_blocks / q,
            "concurrency=" + std::to_string(concurrency)};
}

namespace {

void copy_view_dir(const std::filesystem::path& from, const std::filesystem::path& to) {
    std::filesystem::remove_all(to);
    std::filesystem::create_directories(to);
    std::filesystem::copy(from, to, std::filesystem::copy_options::recursive);
}

}  // namespace

UpdateBench bench_update(const View& view, const std::vector<Record>& batch,
                         const std::filesystem::path& work_dir, int repeats) {
    namespace fs = std::filesystem;
    fs::create_directories(work_dir);

    // The merge path consumes a CSV; write the batch once.
    const fs::path batch_csv = work_dir / "batch.csv";
    write_csv(batch_csv, view.schema(), batch, view.dictionaries());

    std::vector<double> merge_ms, rebuild_ms;
    int k_before = view.meta().resolution, k_after = k_before;
    for (int r = 0; r < repeats; ++r) {
        const fs::path dir = work_dir / ("merge_" + std::to_string(r));
        copy_view_dir(view.dir(), dir);
        View work = View::open(dir);
        const auto t0 = Clock::now();
        const UpdateReport report = work.update(batch_csv);
        merge_ms.push_back(ms_since(t0));
        k_after = report.resolution_after;
    }
    for (int r = 0; r < repeats; ++r) {
        const fs::path dir = work_dir / ("rebuild_" + std::to_string(r));
        const auto t0 = Clock::now();
        view.rebuild_with_batch(batch, dir);
        rebuild_ms.push_back(ms_since(t0));
    }

    UpdateBench bench;
    const auto m = summarize(merge_ms);
    const auto b = summarize(rebuild_ms);
    bench.ratio = m.median > 0 ? b.median / m.median : 0.0;
    char ratio_str[32];
    std::snprintf(ratio_str, sizeof ratio_str, "%.2f", bench.ratio);
    bench.merge = {"merge", "update", repeats, m.mean, m.median, m.p99, -1, -1,
                   "k_before=" + std::to_string(k_before) + " k_after=" + std::to_string(k_after) +
                       " rebuild_over_merge=" + ratio_str};
    bench.rebuild = {"rebuild", "update", repeats, b.mean, b.median, b.p99, -1, -1, ""};
    return bench;
}

}  // namespace gcube
