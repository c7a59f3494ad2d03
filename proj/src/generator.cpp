#include "gcube/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>

#include "gcube/error.hpp"

namespace gcube {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

namespace {

double gaussian(std::mt19937_64& rng) {
    // Box-Muller; u1 nudged away from zero.
    const double u1 = std::max(uniform01(rng), 0x1.0p-53);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::uint64_t below(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

}  // namespace

GenConfig GenConfig::synthetic(std::size_t d_cat, std::size_t d_cont, std::uint64_t n,
                               std::uint64_t seed, GenDist dist, std::uint32_t cardinality,
                               std::uint32_t distinct) {
    GenConfig config;
    for (std::size_t i = 0; i < d_cat; ++i)
        config.dims.push_back({DimKind::categorical, cardinality, 0});
    for (std::size_t i = 0; i < d_cont; ++i)
        config.dims.push_back({DimKind::continuous, 0, distinct});
    config.n = n;
    config.seed = seed;
    config.dist = dist;
    return config;
}

GenConfig GenConfig::hydro_like(std::uint64_t n, std::uint64_t seed, GenDist dist) {
    GenConfig config;
    config.dims.push_back({DimKind::categorical, 51, 0});
    config.dims.push_back({DimKind::categorical, 51, 0});
    for (std::uint32_t distinct : {56u, 100u, 802u, 212u})
        config.dims.push_back({DimKind::continuous, 0, distinct});
    config.n = n;
    config.seed = seed;
    config.dist = dist;
    return config;
}

Schema generator_schema(const GenConfig& config) {
    if (config.dims.empty()) throw DomainError("generator config has no dimensions");
    std::vector<DimensionSpec> dims;
    std::size_t cat = 0, cont = 0;
    for (const auto& gd : config.dims) {
        DimensionSpec spec;
        if (gd.kind == DimKind::categorical) {
            if (gd.cardinality < 1) throw DomainError("categorical generator dim needs cardinality");
            spec.name = "cat" + std::to_string(cat++);
            spec.kind = DimKind::categorical;
            spec.cardinality = gd.cardinality;
        } else {
            if (gd.distinct_values < 1) throw DomainError("continuous generator dim needs distinct count");
            spec.name = "x" + std::to_string(cont++);
            spec.kind = DimKind::continuous;
            spec.lo = config.continuous_lo;
            spec.hi = config.continuous_hi;
        }
        dims.push_back(std::move(spec));
    }
    std::vector<std::string> measures;
    for (std::size_t i = 0; i < config.measure_count; ++i) measures.push_back("m" + std::to_string(i));
    return Schema(std::move(dims), std::move(measures));
}

std::vector<Record> generate_records(const GenConfig& config, const Schema& schema) {
    if (config.dist == GenDist::clustered && config.clusters < 1)
        throw DomainError("clustered generation needs at least one cluster");
    std::mt19937_64 rng(config.seed);
    const std::uint64_t n = config.n;
    const std::size_t d = config.dims.size();

    // Per-dimension value pools, sorted so clustered index noise maps to
    // nearby values.
    std::vector<std::vector<double>> pools(d);
    for (std::size_t i = 0; i < d; ++i) {
        const auto& gd = config.dims[i];
        if (gd.kind == DimKind::categorical) {
            pools[i].resize(gd.cardinality);
            for (std::uint32_t v = 0; v < gd.cardinality; ++v) pools[i][v] = v;
        } else {
            std::set<double> values;
            const double span = config.continuous_hi - config.continuous_lo;
            while (values.size() < gd.distinct_values)
                values.insert(config.continuous_lo + uniform01(rng) * span);
            pools[i].assign(values.begin(), values.end());
        }
    }

    // Cluster centers in pool-index space, one fraction per dimension.
    std::vector<std::vector<double>> centers;
    if (config.dist == GenDist::clustered) {
        centers.resize(config.clusters);
        for (auto& c : centers) {
            c.resize(d);
            for (auto& v : c) v = uniform01(rng);
        }
    }

    std::vector<std::vector<std::uint32_t>> value_index(d, std::vector<std::uint32_t>(n));
    std::vector<std::uint32_t> cluster_of;
    if (config.dist == GenDist::clustered) {
        cluster_of.resize(n);
        for (auto& c : cluster_of) c = static_cast<std::uint32_t>(below(rng, config.clusters));
    }
    for (std::size_t i = 0; i < d; ++i) {
        const auto pool_size = static_cast<std::uint32_t>(pools[i].size());
        for (std::uint64_t r = 0; r < n; ++r) {
            if (config.dist == GenDist::uniform) {
                value_index[i][r] = static_cast<std::uint32_t>(below(rng, pool_size));
            } else {
                const double center = centers[cluster_of[r]][i];
                double frac = center + gaussian(rng) * 0.05;
                frac = std::clamp(frac, 0.0, 1.0 - 1e-12);
                value_index[i][r] = static_cast<std::uint32_t>(frac * pool_size);
            }
        }
        // Force full pool coverage when the row count allows it, on a
        // random subset of rows so the imprint is unbiased.
        if (n >= pool_size) {
            std::vector<std::uint64_t> rows(n);
            for (std::uint64_t r = 0; r < n; ++r) rows[r] = r;
            for (std::uint32_t v = 0; v < pool_size; ++v) {
                const std::uint64_t pick = v + below(rng, n - v);
                std::swap(rows[v], rows[pick]);
                value_index[i][rows[v]] = v;
            }
        }
    }

    std::vector<Record> records;
    records.reserve(n);
    for (std::uint64_t r = 0; r < n; ++r) {
        std::vector<double> coords(d);
        for (std::size_t i = 0; i < d; ++i) coords[i] = pools[i][value_index[i][r]];
        std::vector<double> measures(config.measure_count);
        for (auto& m : measures) m = uniform01(rng) * 100.0;
        records.emplace_back(schema, std::move(coords), std::move(measures));
    }
    return records;
}

void generate_csv(const GenConfig& config, const std::filesystem::path& csv_path,
                  const std::filesystem::path& schema_path) {
    const Schema schema = generator_schema(config);
    const auto records = generate_records(config, schema);

    Dictionaries dicts = Dictionaries::empty(schema);
    char buf[16];
    for (std::size_t i = 0; i < schema.dim_count(); ++i) {
        const auto& spec = schema.dimension(i);
        if (spec.kind != DimKind::categorical) continue;
        for (std::uint32_t v = 0; v < spec.cardinality; ++v) {
            std::snprintf(buf, sizeof buf, "v%03u", v);
            dicts.per_dim[i].add(buf);
        }
    }
    write_csv(csv_path, schema, records, dicts);
    schema.save(schema_path);
}

std::vector<Record> make_update_batch(const Schema& schema, const std::vector<Record>& records,
                                      double frac, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto size = static_cast<std::uint64_t>(
        std::ceil(frac * static_cast<double>(records.size())));
    std::vector<Record> batch;
    batch.reserve(size);
    for (std::uint64_t i = 0; i < size; ++i) {
        std::vector<double> coords(schema.dim_count());
        if (i % 2 == 0 && !records.empty()) {
            coords = records[below(rng, records.size())].coords();
        } else {
            for (std::size_t d = 0; d < schema.dim_count(); ++d) {
                const auto& spec = schema.dimension(d);
                if (spec.kind == DimKind::categorical) {
                    // Reuse observed ids so the batch stays within the
                    // view's dictionary.
                    coords[d] = records.empty()
                                    ? 0.0
                                    : records[below(rng, records.size())].coord(d);
                } else {
                    coords[d] = spec.lo + uniform01(rng) * (spec.hi - spec.lo);
                }
            }
        }
        std::vector<double> measures(schema.measure_count());
        for (auto& m : measures) m = uniform01(rng) * 100.0;
        batch.emplace_back(schema, std::move(coords), std::move(measures));
    }
    return batch;
}

QueryRegion random_region(const Schema& schema, std::mt19937_64& rng) {
    QueryRegion region = QueryRegion::unconstrained(schema.dim_count());
    for (std::size_t i = 0; i < schema.dim_count(); ++i) {
        if (uniform01(rng) >= 0.7) continue;
        const auto& spec = schema.dimension(i);
        if (spec.kind == DimKind::categorical) {
            auto a = static_cast<double>(below(rng, spec.cardinality));
            auto b = static_cast<double>(below(rng, spec.cardinality));
            region.dims[i] = Interval{std::min(a, b), std::max(a, b)};
        } else {
            const double span = spec.hi - spec.lo;
            double a = spec.lo + uniform01(rng) * span;
            double b = spec.lo + uniform01(rng) * span;
            region.dims[i] = Interval{std::min(a, b), std::max(a, b)};
        }
    }
    return region;
}

}  // namespace gcube
