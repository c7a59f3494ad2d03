#include "gcube/record.hpp"

#include <string>

#include "gcube/error.hpp"
#include "gcube/grid.hpp"

namespace gcube {

Record::Record(const Schema& schema, std::vector<double> coords, std::vector<double> measures)
    : coords_(std::move(coords)), measures_(std::move(measures)) {
    if (coords_.size() != schema.dim_count())
        throw DomainError("record has " + std::to_string(coords_.size()) + " coordinates, schema has " +
                          std::to_string(schema.dim_count()) + " dimensions");
    if (measures_.size() != schema.measure_count())
        throw DomainError("record has " + std::to_string(measures_.size()) + " measures, schema has " +
                          std::to_string(schema.measure_count()));
    key_.resize(coords_.size());
    for (std::size_t i = 0; i < coords_.size(); ++i)
        key_[i] = key_fraction(schema.dimension(i), coords_[i]);
}

}  // namespace gcube
