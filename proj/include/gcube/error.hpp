#pragma once

#include <stdexcept>
#include <string>

namespace gcube {

// Base class for all gcube errors. The CLI renders these on stderr with a
// nonzero exit code; library callers can catch subclasses selectively.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A coordinate or id fell outside its dimension's declared domain.
class DomainError : public Error {
public:
    using Error::Error;
};

// Malformed or mismatched on-disk artifact: bad magic, wrong version,
// checksum failure, stale digest, unparsable schema/CSV/JSON.
class FormatError : public Error {
public:
    using Error::Error;
};

// Input that was required to be in Hilbert order is not.
class OrderError : public Error {
public:
    using Error::Error;
};

// Filesystem-level failure, always carrying the offending path.
class IoError : public Error {
public:
    using Error::Error;
};

// Invalid query: unknown measure, holistic function routed to the
// pre-aggregate path, malformed region.
class QueryError : public Error {
public:
    using Error::Error;
};

}  // namespace gcube
