#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gcube/rank.hpp"
#include "gcube/schema.hpp"

namespace gcube {

// One fact row: a raw coordinate per dimension (categorical ids held as
// integral doubles, continuous values as-is) plus one double per measure.
// Construction validates against the schema and precomputes the per
// dimension key fractions that ordering, comparison and merging work on.
class Record {
public:
    Record(const Schema& schema, std::vector<double> coords, std::vector<double> measures);

    const std::vector<double>& coords() const { return coords_; }
    const std::vector<double>& measures() const { return measures_; }
    double coord(std::size_t i) const { return coords_[i]; }
    double measure(std::size_t i) const { return measures_[i]; }

    // 53-bit key fraction per dimension; derived from coords at construction.
    const std::vector<std::uint64_t>& key() const { return key_; }

    // Key equality: bitwise-equal fractions in every dimension. Records that
    // compare equal here are the same key even if their measures differ.
    bool same_key(const Record& other) const { return key_ == other.key_; }

    // Last computed (rank, resolution) pair; refreshed by the comparator.
    mutable std::optional<HilbertRank> cached_rank;

private:
    std::vector<double> coords_;
    std::vector<double> measures_;
    std::vector<std::uint64_t> key_;
};

}  // namespace gcube
