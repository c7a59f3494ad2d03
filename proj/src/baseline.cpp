#include "gcube/baseline.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <unordered_set>

#include "gcube/error.hpp"
#include "gcube/grid.hpp"
#include "gcube/hilbert.hpp"

namespace gcube {

namespace {

struct KeyHash {
    std::size_t operator()(const std::vector<std::uint64_t>* key) const {
        std::size_t h = 0xcbf29ce484222325ull;
        for (std::uint64_t v : *key) {
            h ^= v;
            h *= 0x100000001b3ull;
        }
        return h;
    }
};

struct KeyEq {
    bool operator()(const std::vector<std::uint64_t>* a,
                    const std::vector<std::uint64_t>* b) const {
        return *a == *b;
    }
};

// All distinct-key records in distinct cells at resolution k?
bool separates(const std::vector<const std::vector<std::uint64_t>*>& keys, int k) {
    const int shift = key_fraction_bits - k;
    std::vector<std::vector<std::uint64_t>> cells;
    cells.reserve(keys.size());
    for (const auto* key : keys) {
        std::vector<std::uint64_t> c(key->size());
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = (*key)[i] >> shift;
        cells.push_back(std::move(c));
    }
    std::unordered_set<const std::vector<std::uint64_t>*, KeyHash, KeyEq> distinct;
    distinct.reserve(cells.size() * 2);
    for (const auto& c : cells)
        if (!distinct.insert(&c).second) return false;
    return true;
}

}  // namespace

int required_static_resolution(const std::vector<Record>& records, const Schema& schema) {
    const int k0 = initial_resolution(schema);
    if (records.size() < 2) return k0;

    // Unique keys only: duplicate keys occupy the same cell at every
    // resolution and impose no requirement.
    std::unordered_set<const std::vector<std::uint64_t>*, KeyHash, KeyEq> unique;
    unique.reserve(records.size() * 2);
    for (const auto& rec : records) unique.insert(&rec.key());
    std::vector<const std::vector<std::uint64_t>*> keys(unique.begin(), unique.end());

    if (separates(keys, k0)) return k0;
    int lo = k0;  // known failing
    int hi = k0;
    while (true) {
        hi = std::min(hi * 2, k_max_resolution);
        if (separates(keys, hi)) break;
        lo = hi;
        if (hi == k_max_resolution)
            throw DomainError("records cannot be separated at any resolution up to " +
                              std::to_string(k_max_resolution));
    }
    while (lo + 1 < hi) {
        const int mid = lo + (hi - lo) / 2;
        if (separates(keys, mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

std::vector<Record> prediscretize_sort(std::vector<Record> records, const Schema& schema, int k_s) {
    std::vector<RankInt> ranks;
    ranks.reserve(records.size());
    for (const auto& rec : records)
        ranks.push_back(hilbert_rank(cell_coords(rec, schema, k_s), k_s));

    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return ranks[a] < ranks[b]; });

    for (std::size_t i = 1; i < order.size(); ++i) {
        if (ranks[order[i - 1]] == ranks[order[i]] &&
            !records[order[i - 1]].same_key(records[order[i]]))
            throw DomainError("distinct-key records collide at static resolution " +
                              std::to_string(k_s));
    }

    std::vector<Record> out;
    out.reserve(records.size());
    for (std::size_t i : order) out.push_back(std::move(records[i]));
    return out;
}

}  // namespace gcube
