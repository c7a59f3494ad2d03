#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gcube/record.hpp"
#include "gcube/schema.hpp"

namespace gcube {

// Dense id assignment for one categorical dimension's string values, in
// first-seen order. Ids never exceed the declared cardinality; tokens
// beyond it are rejected at ingestion.
class Dictionary {
public:
    std::optional<std::uint32_t> find(const std::string& token) const;
    std::uint32_t add(const std::string& token);
    const std::vector<std::string>& tokens() const { return tokens_; }
    std::size_t size() const { return tokens_.size(); }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::uint32_t> ids_;
};

// One dictionary per dimension (continuous slots stay empty), persisted as
// dictionaries/<dimension>.json inside a view directory.
struct Dictionaries {
    std::vector<Dictionary> per_dim;

    static Dictionaries empty(const Schema& schema);
    static Dictionaries load(const std::filesystem::path& dir, const Schema& schema);
    void save(const std::filesystem::path& dir, const Schema& schema) const;
};

struct RejectedRow {
    std::uint64_t line = 0;  // 1-based, counting the header
    std::string reason;
};

std::string rejects_to_json(std::span<const RejectedRow> rejects);

enum class BadRowPolicy {
    fail,    // initial load: first malformed row aborts the ingest
    reject,  // updates: malformed rows are collected per line
};

struct CsvReadResult {
    std::vector<Record> records;
    std::vector<RejectedRow> rejects;
};

// Read a fact CSV whose header must name the schema's dimensions then
// measures, in order. Categorical tokens are interned through `dicts`
// (extending them while capacity remains). Fields must not contain commas
// or quotes; values are plain decimal literals.
CsvReadResult read_csv(const std::filesystem::path& path, const Schema& schema,
                       Dictionaries& dicts, BadRowPolicy policy);

void write_csv(const std::filesystem::path& path, const Schema& schema,
               std::span<const Record> records, const Dictionaries& dicts);

}  // namespace gcube
