#include "gcube/grid.hpp"

#include <cmath>
#include <string>

#include "gcube/error.hpp"
#include "gcube/record.hpp"

namespace gcube {

namespace {

[[noreturn]] void domain_violation(const DimensionSpec& spec, double value) {
    throw DomainError("value " + std::to_string(value) + " outside domain of dimension '" +
                      spec.name + "'");
}

}  // namespace

double normalize(const DimensionSpec& spec, double value) {
    if (spec.kind == DimKind::categorical) {
        if (!(value >= 0.0) || value >= spec.cardinality || value != std::floor(value))
            domain_violation(spec, value);
        return std::ldexp(value, -spec.bit_budget());
    }
    if (!(value >= spec.lo) || !(value <= spec.hi)) domain_violation(spec, value);
    double f = (value - spec.lo) / (spec.hi - spec.lo);
    if (f >= 1.0) f = std::nextafter(1.0, 0.0);  // value == hi lands in the last cell
    return f;
}

std::uint64_t key_fraction(const DimensionSpec& spec, double value) {
    const double f = normalize(spec, value);
    // f < 1, so f * 2^53 < 2^53 and the scaling is exact (exponent shift).
    return static_cast<std::uint64_t>(std::ldexp(f, key_fraction_bits));
}

std::uint64_t cell_coord(std::uint64_t frac, int k) {
    return frac >> (key_fraction_bits - k);
}

std::vector<std::uint64_t> cell_coords(const Record& record, const Schema& schema, int k) {
    if (k < 1 || k > k_max_resolution)
        throw DomainError("resolution " + std::to_string(k) + " outside [1, " +
                          std::to_string(k_max_resolution) + "]");
    const auto& key = record.key();
    std::vector<std::uint64_t> cells(schema.dim_count());
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = cell_coord(key[i], k);
    return cells;
}

int initial_resolution(const Schema& schema) {
    int k = 1;
    for (const auto& d : schema.dimensions())
        if (d.kind == DimKind::categorical && d.bit_budget() > k) k = d.bit_budget();
    return k;
}

}  // namespace gcube
