#include "gcube/hilbert.hpp"

#include <algorithm>
#include <string>

#include "gcube/error.hpp"
#include "gcube/grid.hpp"

namespace gcube {

namespace {

// Butz/Skilling bit-plane transform between grid coordinates and the
// transposed Hilbert index. Planes are processed most-significant first and
// each step touches only lower planes, which is what makes rank prefixes
// stable under refinement: the order-(k+1) rank of a cell's child, shifted
// right by d, is the order-k rank of the cell.
void axes_to_transpose(std::vector<std::uint64_t>& x, int k) {
    const std::size_t n = x.size();
    const std::uint64_t m = 1ull << (k - 1);
    for (std::uint64_t q = m; q > 1; q >>= 1) {
        const std::uint64_t p = q - 1;
        for (std::size_t i = 0; i < n; ++i) {
            if (x[i] & q) {
                x[0] ^= p;
            } else {
                const std::uint64_t t = (x[0] ^ x[i]) & p;
                x[0] ^= t;
                x[i] ^= t;
            }
        }
    }
    for (std::size_t i = 1; i < n; ++i) x[i] ^= x[i - 1];
    std::uint64_t t = 0;
    for (std::uint64_t q = m; q > 1; q >>= 1)
        if (x[n - 1] & q) t ^= q - 1;
    for (auto& v : x) v ^= t;
}

void transpose_to_axes(std::vector<std::uint64_t>& x, int k) {
    const std::size_t n = x.size();
    const std::uint64_t top = 2ull << (k - 1);
    std::uint64_t t = x[n - 1] >> 1;
    for (std::size_t i = n - 1; i > 0; --i) x[i] ^= x[i - 1];
    x[0] ^= t;
    for (std::uint64_t q = 2; q != top; q <<= 1) {
        const std::uint64_t p = q - 1;
        for (std::size_t i = n; i-- > 0;) {
            if (x[i] & q) {
                x[0] ^= p;
            } else {
                const std::uint64_t u = (x[0] ^ x[i]) & p;
                x[0] ^= u;
                x[i] ^= u;
            }
        }
    }
}

void check_resolution(int k) {
    if (k < 1 || k > k_max_resolution)
        throw DomainError("resolution " + std::to_string(k) + " outside [1, " +
                          std::to_string(k_max_resolution) + "]");
}

}  // namespace

RankInt hilbert_rank(std::span<const std::uint64_t> cells, int k) {
    check_resolution(k);
    const std::size_t d = cells.size();
    if (d == 0) throw DomainError("hilbert_rank needs at least one dimension");
    for (std::size_t i = 0; i < d; ++i)
        if (cells[i] >> k)
            throw DomainError("cell coordinate " + std::to_string(cells[i]) +
                              " out of range for resolution " + std::to_string(k));
    if (d == 1) return RankInt(cells[0]);

    std::vector<std::uint64_t> x(cells.begin(), cells.end());
    axes_to_transpose(x, k);

    // Interleave the transposed planes, most significant first, dimension 0
    // contributing the top bit of each d-bit digit.
    RankInt rank = 0;
    std::uint64_t chunk = 0;
    int chunk_bits = 0;
    for (int b = k - 1; b >= 0; --b) {
        for (std::size_t i = 0; i < d; ++i) {
            chunk = (chunk << 1) | ((x[i] >> b) & 1u);
            if (++chunk_bits == 64) {
                rank <<= 64;
                rank |= chunk;
                chunk = 0;
                chunk_bits = 0;
            }
        }
    }
    if (chunk_bits > 0) {
        rank <<= chunk_bits;
        rank |= chunk;
    }
    return rank;
}

std::vector<std::uint64_t> hilbert_cells(const RankInt& rank, int k, std::size_t dims) {
    check_resolution(k);
    if (dims == 0) throw DomainError("hilbert_cells needs at least one dimension");
    if (rank < 0 || (rank >> (dims * static_cast<unsigned>(k))) != 0)
        throw DomainError("rank out of range for a " + std::to_string(dims) + "-dimensional order-" +
                          std::to_string(k) + " curve");
    if (dims == 1) return {rank.convert_to<std::uint64_t>()};

    std::vector<std::uint64_t> x(dims, 0);
    for (int b = 0; b < k; ++b)
        for (std::size_t i = 0; i < dims; ++i) {
            const unsigned pos = static_cast<unsigned>(b) * dims + (dims - 1 - i);
            if (boost::multiprecision::bit_test(rank, pos)) x[i] |= 1ull << b;
        }
    transpose_to_axes(x, k);
    return x;
}

RankInt record_rank(const Record& record, const Schema& schema, int k, bool use_cache) {
    if (use_cache && record.cached_rank && record.cached_rank->resolution == k)
        return record.cached_rank->bits;
    RankInt rank = hilbert_rank(cell_coords(record, schema, k), k);
    if (use_cache) record.cached_rank = HilbertRank{rank, k};
    return rank;
}

namespace {

bool cells_equal_at(const Record& a, const Record& b, int k) {
    const auto& ka = a.key();
    const auto& kb = b.key();
    const int shift = key_fraction_bits - k;
    for (std::size_t i = 0; i < ka.size(); ++i)
        if ((ka[i] >> shift) != (kb[i] >> shift)) return false;
    return true;
}

}  // namespace

Ordering hilbert_compare(const Record& a, const Record& b, int& k, const Schema& schema,
                         bool use_cache) {
    if (a.same_key(b)) return Ordering::equal;
    while (cells_equal_at(a, b, k)) {
        ++k;
        // Distinct keys differ in some fraction bit <= 53, so the loop must
        // separate them before the cap.
        if (k > k_max_resolution)
            throw Error("internal: distinct keys failed to separate by resolution cap");
    }
    const RankInt ra = record_rank(a, schema, k, use_cache);
    const RankInt rb = record_rank(b, schema, k, use_cache);
    return ra < rb ? Ordering::less : Ordering::greater;
}

int hilbert_sort(std::vector<Record>& records, const Schema& schema, SortOptions options) {
    int k = initial_resolution(schema);
    std::stable_sort(records.begin(), records.end(), [&](const Record& a, const Record& b) {
        return hilbert_compare(a, b, k, schema, options.use_rank_cache) == Ordering::less;
    });
    return k;
}

}  // namespace gcube
