// Reference answers for range-aggregate queries: a plain linear scan over
// the raw records. Deliberately shares no traversal or folding code with
// the index path in query.cpp so the two can check each other.

#include <algorithm>
#include <vector>

#include "gcube/error.hpp"
#include "gcube/query.hpp"

namespace gcube {

QueryResult brute_force_aggregate(std::span<const Record> records, const QueryRegion& region,
                                  const AggregateRequest& request, const Schema& schema) {
    region.validate(schema);
    std::size_t measure = 0;
    if (request.fn == AggregateFn::count) {
        if (!request.measure.empty()) throw QueryError("count does not take a measure");
    } else {
        measure = schema.measure_index(request.measure);
    }

    const auto inside = [&](const Record& rec) {
        for (std::size_t i = 0; i < region.dims.size(); ++i) {
            if (!region.dims[i]) continue;
            if (rec.coord(i) < region.dims[i]->lo || rec.coord(i) > region.dims[i]->hi)
                return false;
        }
        return true;
    };

    std::uint64_t n = 0;
    double sum = 0.0, mn = 0.0, mx = 0.0;
    std::vector<double> kept;  // median only
    for (const Record& rec : records) {
        if (!inside(rec)) continue;
        if (request.fn != AggregateFn::count) {
            const double v = rec.measure(measure);
            if (n == 0) {
                sum = v;
                mn = v;
                mx = v;
            } else {
                sum += v;
                mn = std::min(mn, v);
                mx = std::max(mx, v);
            }
            if (request.fn == AggregateFn::median) kept.push_back(v);
        }
        ++n;
    }

    QueryResult res;
    res.empty_region = n == 0;
    switch (request.fn) {
        case AggregateFn::count:
            res.count = n;
            break;
        case AggregateFn::sum:
            res.value = n == 0 ? 0.0 : sum;
            break;
        case AggregateFn::avg:
            if (n > 0) res.value = sum / static_cast<double>(n);
            break;
        case AggregateFn::min:
            if (n > 0) res.value = mn;
            break;
        case AggregateFn::max:
            if (n > 0) res.value = mx;
            break;
        case AggregateFn::median:
            if (n > 0) {
                std::sort(kept.begin(), kept.end());
                const std::size_t h = kept.size() / 2;
                res.value = kept.size() % 2 == 1 ? kept[h] : (kept[h - 1] + kept[h]) / 2.0;
            }
            break;
    }
    return res;
}

}  // namespace gcube
