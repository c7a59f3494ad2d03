#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gcube {

enum class DimKind { categorical, continuous };

// Declaration of one view dimension. Categorical dimensions carry a fixed
// cardinality; continuous dimensions carry closed real bounds [lo, hi].
// The bounds come from the schema file, never from scanning data: update
// rows outside them are rejected, not absorbed.
struct DimensionSpec {
    std::string name;
    DimKind kind = DimKind::categorical;
    std::uint32_t cardinality = 0;  // categorical only, >= 1
    double lo = 0.0;                // continuous only
    double hi = 0.0;                // continuous only, > lo

    // Bits needed so that every categorical id gets its own grid cell:
    // ceil(log2(cardinality)). Zero for cardinality 1.
    int bit_budget() const;

    bool operator==(const DimensionSpec&) const = default;
};

// Ordered dimension list plus measure names. The dimension order is fixed
// for the lifetime of a view: it determines the Hilbert embedding, so two
// schemas with permuted dimensions are different schemas (different digest).
class Schema {
public:
    Schema() = default;
    Schema(std::vector<DimensionSpec> dims, std::vector<std::string> measures);

    const std::vector<DimensionSpec>& dimensions() const { return dims_; }
    const std::vector<std::string>& measures() const { return measures_; }
    std::size_t dim_count() const { return dims_.size(); }
    std::size_t measure_count() const { return measures_.size(); }

    const DimensionSpec& dimension(std::size_t i) const { return dims_[i]; }

    // Index of a measure by name; throws QueryError if absent.
    std::size_t measure_index(const std::string& name) const;
    // Index of a dimension by name; throws QueryError if absent.
    std::size_t dimension_index(const std::string& name) const;

    // FNV-1a over a canonical rendering; used to cross-link the schema file
    // with block and index files.
    std::uint64_t digest() const;
    std::string digest_hex() const;

    // JSON document with the normative key names:
    //   {"dimensions": [{"name", "kind", "cardinality" | "lo", "hi"}, ...],
    //    "measures": [name, ...]}
    static Schema parse_json(const std::string& text);
    std::string to_json() const;

    static Schema load(const std::filesystem::path& file);
    void save(const std::filesystem::path& file) const;

    bool operator==(const Schema&) const = default;

private:
    void validate() const;

    std::vector<DimensionSpec> dims_;
    std::vector<std::string> measures_;
};

}  // namespace gcube
