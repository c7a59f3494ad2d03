#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gcube/record.hpp"
#include "gcube/schema.hpp"
#include "gcube/view.hpp"

namespace gcube {

// One row of the bench table. Latency columns are medians/means over the
// phase's repetitions (or per-query samples); counters are per-query means.
// Unused columns render empty.
struct BenchRow {
    std::string method;
    std::string phase;
    int repeats = 0;
    double time_ms_mean = -1.0;
    double time_ms_median = -1.0;
    double time_ms_p99 = -1.0;
    double nodes_visited = -1.0;
    double blocks_read = -1.0;
    std::string extra;
};

std::string bench_csv_header();
std::string bench_csv_row(const BenchRow& row);

// Adaptive sort vs pre-discretization on the same records. Verifies the two
// orders are identical before timing and reports k_f / k_s.
struct SortBench {
    BenchRow adaptive;
    BenchRow prediscretize;
    bool order_agreement = false;
    int adaptive_resolution = 0;
    int static_resolution = 0;
};
SortBench bench_sort(const std::vector<Record>& records, const Schema& schema, int repeats);

// Random range-aggregate workload against a built view; `concurrency`
// readers split the queries, each over its own block-file handle.
BenchRow bench_queries(const View& view, std::size_t num_queries, std::uint64_t seed,
                       int concurrency);

// Merge-path update vs full rebuild for the same batch, both repeated on
// fresh copies of the view.
struct UpdateBench {
    BenchRow merge;
    BenchRow rebuild;
    double ratio = 0.0;  // rebuild time / merge time
};
UpdateBench bench_update(const View& view, const std::vector<Record>& batch,
                         const std::filesystem::path& work_dir, int repeats);

}  // namespace gcube
