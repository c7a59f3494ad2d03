#include "gcube/merge.hpp"

#include <string>

#include "gcube/error.hpp"
#include "gcube/hilbert.hpp"

namespace gcube {

MergeResult hilbert_merge(RecordStream& update, RecordStream& target, int resolution,
                          const Schema& schema) {
    int k = resolution;

    std::optional<Record> prev_update, prev_target;
    const auto pull = [&](RecordStream& stream, std::optional<Record>& prev,
                          const char* name) -> std::optional<Record> {
        auto rec = stream.next();
        if (rec) {
            if (prev && hilbert_compare(*prev, *rec, k, schema) == Ordering::greater)
                throw OrderError(std::string(name) + " stream out of Hilbert order at position " +
                                 std::to_string(stream.pulled()));
            prev = *rec;
        }
        return rec;
    };

    MergeResult out;
    auto u = pull(update, prev_update, "update");
    auto t = pull(target, prev_target, "target");
    while (u && t) {
        switch (hilbert_compare(*u, *t, k, schema)) {
            case Ordering::equal:
                out.records.push_back(std::move(*u));
                ++out.replaced;
                u = pull(update, prev_update, "update");
                t = pull(target, prev_target, "target");
                break;
            case Ordering::less:
                out.records.push_back(std::move(*u));
                u = pull(update, prev_update, "update");
                break;
            case Ordering::greater:
                out.records.push_back(std::move(*t));
                t = pull(target, prev_target, "target");
                break;
        }
    }
    while (u) {
        out.records.push_back(std::move(*u));
        u = pull(update, prev_update, "update");
    }
    while (t) {
        out.records.push_back(std::move(*t));
        t = pull(target, prev_target, "target");
    }
    out.final_resolution = k;
    return out;
}

}  // namespace gcube
