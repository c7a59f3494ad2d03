#include "gcube/schema.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "gcube/error.hpp"

namespace gcube {

using nlohmann::json;

int DimensionSpec::bit_budget() const {
    if (cardinality <= 1) return 0;
    return std::bit_width(static_cast<std::uint64_t>(cardinality - 1));
}

Schema::Schema(std::vector<DimensionSpec> dims, std::vector<std::string> measures)
    : dims_(std::move(dims)), measures_(std::move(measures)) {
    validate();
}

void Schema::validate() const {
    if (dims_.empty()) throw FormatError("schema must declare at least one dimension");
    std::unordered_set<std::string> names;
    for (const auto& d : dims_) {
        if (d.name.empty()) throw FormatError("dimension with empty name");
        if (!names.insert(d.name).second)
            throw FormatError("duplicate dimension name '" + d.name + "'");
        if (d.kind == DimKind::categorical) {
            if (d.cardinality < 1)
                throw FormatError("categorical dimension '" + d.name + "' needs cardinality >= 1");
        } else {
            if (!(d.hi > d.lo) || !std::isfinite(d.lo) || !std::isfinite(d.hi))
                throw FormatError("continuous dimension '" + d.name + "' needs finite bounds with hi > lo");
        }
    }
    for (const auto& m : measures_) {
        if (m.empty()) throw FormatError("measure with empty name");
        if (!names.insert(m).second)
            throw FormatError("duplicate name '" + m + "' among dimensions/measures");
    }
}

std::size_t Schema::measure_index(const std::string& name) const {
    for (std::size_t i = 0; i < measures_.size(); ++i)
        if (measures_[i] == name) return i;
    throw QueryError("unknown measure '" + name + "'");
}

std::size_t Schema::dimension_index(const std::string& name) const {
    for (std::size_t i = 0; i < dims_.size(); ++i)
        if (dims_[i].name == name) return i;
    throw QueryError("unknown dimension '" + name + "'");
}

namespace {

void fnv1a(std::uint64_t& h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
}

void fnv1a_str(std::uint64_t& h, const std::string& s) { fnv1a(h, s.data(), s.size()); }

std::string hexdouble(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

}  // namespace

std::uint64_t Schema::digest() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& d : dims_) {
        if (d.kind == DimKind::categorical) {
            fnv1a_str(h, "C|" + d.name + "|" + std::to_string(d.cardinality) + ";");
        } else {
            fnv1a_str(h, "R|" + d.name + "|" + hexdouble(d.lo) + "|" + hexdouble(d.hi) + ";");
        }
    }
    for (const auto& m : measures_) fnv1a_str(h, "M|" + m + ";");
    return h;
}

std::string Schema::digest_hex() const {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(digest()));
    return buf;
}

Schema Schema::parse_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("schema is not valid JSON: ") + e.what());
    }
    try {
        std::vector<DimensionSpec> dims;
        for (const auto& jd : doc.at("dimensions")) {
            DimensionSpec d;
            d.name = jd.at("name").get<std::string>();
            const std::string kind = jd.at("kind").get<std::string>();
            if (kind == "categorical") {
                d.kind = DimKind::categorical;
                d.cardinality = jd.at("cardinality").get<std::uint32_t>();
                if (jd.contains("lo") || jd.contains("hi"))
                    throw FormatError("categorical dimension '" + d.name + "' must not carry lo/hi");
            } else if (kind == "continuous") {
                d.kind = DimKind::continuous;
                d.lo = jd.at("lo").get<double>();
                d.hi = jd.at("hi").get<double>();
                if (jd.contains("cardinality"))
                    throw FormatError("continuous dimension '" + d.name + "' must not carry cardinality");
            } else {
                throw FormatError("dimension '" + d.name + "' has unknown kind '" + kind + "'");
            }
            dims.push_back(std::move(d));
        }
        std::vector<std::string> measures;
        if (doc.contains("measures"))
            for (const auto& jm : doc.at("measures")) measures.push_back(jm.get<std::string>());
        return Schema(std::move(dims), std::move(measures));
    } catch (const json::exception& e) {
        throw FormatError(std::string("schema document malformed: ") + e.what());
    }
}

std::string Schema::to_json() const {
    json jd = json::array();
    for (const auto& d : dims_) {
        json j{{"name", d.name}};
        if (d.kind == DimKind::categorical) {
            j["kind"] = "categorical";
            j["cardinality"] = d.cardinality;
        } else {
            j["kind"] = "continuous";
            j["lo"] = d.lo;
            j["hi"] = d.hi;
        }
        jd.push_back(std::move(j));
    }
    json doc{{"dimensions", std::move(jd)}, {"measures", measures_}};
    return doc.dump(2) + "\n";
}

Schema Schema::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open schema file " + file.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_json(text.str());
}

void Schema::save(const std::filesystem::path& file) const {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write schema file " + file.string());
    out << to_json();
    if (!out) throw IoError("failed writing schema file " + file.string());
}

}  // namespace gcube
