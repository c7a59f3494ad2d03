#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "gcube/ingest.hpp"
#include "gcube/query.hpp"
#include "gcube/record.hpp"
#include "gcube/schema.hpp"

namespace gcube {

// Synthetic dataset shapes. Every dimension draws from a fixed pool of
// distinct values (ids for categorical, reals for continuous); when the row
// count allows it, each pool value is forced to appear at least once so the
// per-dimension distinct-value counts are exact.
struct GenDim {
    DimKind kind = DimKind::continuous;
    std::uint32_t cardinality = 0;      // categorical pool size
    std::uint32_t distinct_values = 0;  // continuous pool size
};

enum class GenDist { uniform, clustered };

struct GenConfig {
    std::vector<GenDim> dims;
    std::size_t measure_count = 2;
    std::uint64_t n = 0;
    GenDist dist = GenDist::uniform;
    std::uint64_t seed = 1;
    std::uint32_t clusters = 8;
    double continuous_lo = 0.0;
    double continuous_hi = 1000.0;

    // d_cat categorical dimensions of cardinality `cardinality` plus d_cont
    // continuous dimensions with `distinct` distinct values each. The
    // defaults (64, 1000) are the standard synthetic shape.
    static GenConfig synthetic(std::size_t d_cat, std::size_t d_cont, std::uint64_t n,
                               std::uint64_t seed, GenDist dist,
                               std::uint32_t cardinality = 64, std::uint32_t distinct = 1000);

    // 6 dimensions: 2 categorical with 51 values, 4 continuous with
    // 56, 100, 802 and 212 distinct values.
    static GenConfig hydro_like(std::uint64_t n, std::uint64_t seed, GenDist dist);
};

Schema generator_schema(const GenConfig& config);

// Deterministic for a fixed config (seed included). Records come back
// unsorted, valid for generator_schema(config).
std::vector<Record> generate_records(const GenConfig& config, const Schema& schema);

// Write dataset + schema files; the CSV carries categorical tokens "v000",
// "v001", ... so ingestion exercises the dictionary path.
void generate_csv(const GenConfig& config, const std::filesystem::path& csv_path,
                  const std::filesystem::path& schema_path);

// Random closed region for query workloads: each dimension is constrained
// with probability ~0.7 by an interval between two random domain points.
QueryRegion random_region(const Schema& schema, std::mt19937_64& rng);

// Uniform in [0, 1) from the engine's top 53 bits; identical output on any
// standard library, unlike std::uniform_real_distribution.
double uniform01(std::mt19937_64& rng);

// Update batch of ceil(frac * |records|) rows: half reuse existing keys
// with fresh measures (pure replacements), half are new random points
// within the schema's domains.
std::vector<Record> make_update_batch(const Schema& schema, const std::vector<Record>& records,
                                      double frac, std::uint64_t seed);

}  // namespace gcube
