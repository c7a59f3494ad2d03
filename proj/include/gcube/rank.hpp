#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace gcube {

// A Hilbert rank is a d*k-bit unsigned integer; with d dimensions at the
// deepest resolution that can exceed 300 bits, so ranks use an arbitrary
// width integer rather than a machine word.
using RankInt = boost::multiprecision::cpp_int;

// A rank together with the resolution it was computed at. Also the shape of
// a record's rank cache.
struct HilbertRank {
    RankInt bits;
    int resolution = 0;
};

// Relative order of two records along the curve. The underlying values are
// the -1 | 0 | 1 convention used at process boundaries.
enum class Ordering : int { less = -1, equal = 0, greater = 1 };

}  // namespace gcube
