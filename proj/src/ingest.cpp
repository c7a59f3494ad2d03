#include "gcube/ingest.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gcube/error.hpp"

namespace gcube {

using nlohmann::json;

std::optional<std::uint32_t> Dictionary::find(const std::string& token) const {
    auto it = ids_.find(token);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

std::uint32_t Dictionary::add(const std::string& token) {
    const auto id = static_cast<std::uint32_t>(tokens_.size());
    tokens_.push_back(token);
    ids_.emplace(token, id);
    return id;
}

Dictionaries Dictionaries::empty(const Schema& schema) {
    Dictionaries d;
    d.per_dim.resize(schema.dim_count());
    return d;
}

Dictionaries Dictionaries::load(const std::filesystem::path& dir, const Schema& schema) {
    Dictionaries d = empty(schema);
    for (std::size_t i = 0; i < schema.dim_count(); ++i) {
        const auto& spec = schema.dimension(i);
        if (spec.kind != DimKind::categorical) continue;
        const auto file = dir / (spec.name + ".json");
        std::ifstream in(file);
        if (!in) throw IoError("cannot open dictionary " + file.string());
        json doc;
        try {
            in >> doc;
            for (const auto& t : doc) d.per_dim[i].add(t.get<std::string>());
        } catch (const json::exception& e) {
            throw FormatError("dictionary " + file.string() + " malformed: " + e.what());
        }
        if (d.per_dim[i].size() > spec.cardinality)
            throw FormatError("dictionary " + file.string() + " exceeds declared cardinality");
    }
    return d;
}

void Dictionaries::save(const std::filesystem::path& dir, const Schema& schema) const {
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < schema.dim_count(); ++i) {
        const auto& spec = schema.dimension(i);
        if (spec.kind != DimKind::categorical) continue;
        const auto file = dir / (spec.name + ".json");
        std::ofstream out(file);
        if (!out) throw IoError("cannot write dictionary " + file.string());
        out << json(per_dim[i].tokens()).dump(2) << "\n";
        if (!out) throw IoError("failed writing dictionary " + file.string());
    }
}

std::string rejects_to_json(std::span<const RejectedRow> rejects) {
    json rows = json::array();
    for (const auto& r : rejects) rows.push_back({{"line", r.line}, {"reason", r.reason}});
    return json{{"count", rejects.size()}, {"rejected", std::move(rows)}}.dump(2) + "\n";
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

double parse_double(const std::string& field) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw FormatError("not a number: '" + field + "'");
    if (!std::isfinite(v)) throw FormatError("non-finite value: '" + field + "'");
    return v;
}

std::string expected_header(const Schema& schema) {
    std::string h;
    for (const auto& d : schema.dimensions()) {
        if (!h.empty()) h += ',';
        h += d.name;
    }
    for (const auto& m : schema.measures()) {
        if (!h.empty()) h += ',';
        h += m;
    }
    return h;
}

}  // namespace

CsvReadResult read_csv(const std::filesystem::path& path, const Schema& schema,
                       Dictionaries& dicts, BadRowPolicy policy) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open CSV " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw FormatError("CSV " + path.string() + " is empty (no header)");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected_header(schema))
        throw FormatError("CSV header '" + line + "' does not match schema columns '" +
                          expected_header(schema) + "'");

    CsvReadResult out;
    const std::size_t d = schema.dim_count();
    const std::size_t m = schema.measure_count();
    std::uint64_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            const auto fields = split_line(line);
            if (fields.size() != d + m)
                throw FormatError("expected " + std::to_string(d + m) + " fields, got " +
                                  std::to_string(fields.size()));
            std::vector<double> coords(d);
            for (std::size_t i = 0; i < d; ++i) {
                const auto& spec = schema.dimension(i);
                if (spec.kind == DimKind::categorical) {
                    auto& dict = dicts.per_dim[i];
                    auto id = dict.find(fields[i]);
                    if (!id) {
                        if (dict.size() >= spec.cardinality)
                            throw DomainError("categorical value '" + fields[i] +
                                              "' exceeds cardinality of dimension '" + spec.name +
                                              "'");
                        id = dict.add(fields[i]);
                    }
                    coords[i] = static_cast<double>(*id);
                } else {
                    coords[i] = parse_double(fields[i]);
                }
            }
            std::vector<double> measures(m);
            for (std::size_t i = 0; i < m; ++i) measures[i] = parse_double(fields[d + i]);
            out.records.emplace_back(schema, std::move(coords), std::move(measures));
        } catch (const Error& e) {
            if (policy == BadRowPolicy::fail)
                throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
            out.rejects.push_back({lineno, e.what()});
        }
    }
    return out;
}

void write_csv(const std::filesystem::path& path, const Schema& schema,
               std::span<const Record> records, const Dictionaries& dicts) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write CSV " + path.string());
    out << expected_header(schema) << "\n";
    char buf[40];
    for (const Record& rec : records) {
        std::string row;
        for (std::size_t i = 0; i < schema.dim_count(); ++i) {
            if (i > 0) row += ',';
            if (schema.dimension(i).kind == DimKind::categorical) {
                row += dicts.per_dim[i].tokens()[static_cast<std::uint32_t>(rec.coord(i))];
            } else {
                std::snprintf(buf, sizeof buf, "%.17g", rec.coord(i));
                row += buf;
            }
        }
        for (std::size_t i = 0; i < schema.measure_count(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", rec.measure(i));
            row += ',';
            row += buf;
        }
        out << row << "\n";
    }
    out.flush();
    if (!out) throw IoError("failed writing CSV " + path.string());
}

}  // namespace gcube
