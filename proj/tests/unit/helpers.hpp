#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "gcube/record.hpp"
#include "gcube/schema.hpp"

namespace testutil {

inline gcube::DimensionSpec cat(const std::string& name, std::uint32_t cardinality) {
    gcube::DimensionSpec d;
    d.name = name;
    d.kind = gcube::DimKind::categorical;
    d.cardinality = cardinality;
    return d;
}

inline gcube::DimensionSpec cont(const std::string& name, double lo, double hi) {
    gcube::DimensionSpec d;
    d.name = name;
    d.kind = gcube::DimKind::continuous;
    d.lo = lo;
    d.hi = hi;
    return d;
}

// One categorical (card 8) + two continuous dims, two measures.
inline gcube::Schema mixed_schema() {
    return gcube::Schema({cat("c", 8), cont("x", 0.0, 1.0), cont("y", -10.0, 10.0)},
                         {"m0", "m1"});
}

inline gcube::Schema continuous_schema(std::size_t dims, std::size_t measures = 1) {
    std::vector<gcube::DimensionSpec> d;
    for (std::size_t i = 0; i < dims; ++i) d.push_back(cont("x" + std::to_string(i), 0.0, 1.0));
    std::vector<std::string> m;
    for (std::size_t i = 0; i < measures; ++i) m.push_back("m" + std::to_string(i));
    return gcube::Schema(std::move(d), std::move(m));
}

inline double u01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::vector<gcube::Record> random_records(const gcube::Schema& schema, std::size_t n,
                                                 std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<gcube::Record> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> coords(schema.dim_count());
        for (std::size_t d = 0; d < schema.dim_count(); ++d) {
            const auto& spec = schema.dimension(d);
            if (spec.kind == gcube::DimKind::categorical)
                coords[d] = static_cast<double>(rng() % spec.cardinality);
            else
                coords[d] = spec.lo + u01(rng) * (spec.hi - spec.lo);
        }
        std::vector<double> measures(schema.measure_count());
        for (auto& m : measures) m = u01(rng) * 100.0 - 50.0;
        out.emplace_back(schema, std::move(coords), std::move(measures));
    }
    return out;
}

inline bool same_sequence(const std::vector<gcube::Record>& a,
                          const std::vector<gcube::Record>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].coords() != b[i].coords() || a[i].measures() != b[i].measures()) return false;
    return true;
}

// Unique temp directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        dir_ = std::filesystem::temp_directory_path() /
               ("gcube-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter++));
        std::filesystem::create_directories(dir_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir_, ec);
    }
    const std::filesystem::path& path() const { return dir_; }

private:
    std::filesystem::path dir_;
};

}  // namespace testutil
