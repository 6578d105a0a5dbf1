#include "fedscreen/schema.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "fedscreen/error.hpp"
#include "text.hpp"

namespace fedscreen {

namespace {

void check_range(const std::string& name, const Range& r) {
    if (!std::isfinite(r.lower) || !std::isfinite(r.upper) || !(r.lower < r.upper)) {
        throw Error(ErrorCode::invalid_range, "feature " + name + ": normal range needs lower < upper");
    }
}

}  // namespace

FeatureSchema::FeatureSchema(std::vector<FeatureDef> features, std::string class_name)
    : features_(std::move(features)), class_name_(std::move(class_name)) {
    if (features_.size() != kCbcCount) {
        throw Error(ErrorCode::invalid_config,
                    "schema must list exactly " + std::to_string(kCbcCount) + " CBC features");
    }
    for (std::size_t i = 0; i < kCbcCount; ++i) {
        const FeatureDef& f = features_[i];
        if (!text::iequals(f.name, kCbcNames[i])) {
            throw Error(ErrorCode::invalid_config, "schema feature " + std::to_string(i) + " must be " +
                                                       std::string(kCbcNames[i]) + ", got " + f.name);
        }
        if (f.unit.empty()) throw Error(ErrorCode::invalid_config, "feature " + f.name + ": empty unit");
        check_range(f.name, f.male);
        check_range(f.name, f.female);
    }
}

std::size_t FeatureSchema::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < features_.size(); ++i) {
        if (text::iequals(features_[i].name, name)) return i;
    }
    return kCbcCount;
}

const FeatureDef& FeatureSchema::operator[](std::string_view name) const {
    const std::size_t i = index_of(name);
    if (i >= features_.size()) throw Error(ErrorCode::invalid_input, "unknown feature " + std::string(name));
    return features_[i];
}

const FeatureSchema& default_schema() {
    static const FeatureSchema schema(
        {
            {"RBC", "x10^12 cells/l", {4, 5}, {4, 5}},
            {"HB", "g/dl", {13, 17}, {12, 15}},
            {"HCT", "%", {45, 50}, {30, 45}},
            {"MCV", "fl", {80, 100}, {80, 100}},
            {"MCH", "pg/cell", {27, 34}, {27, 34}},
            {"MCHC", "%", {32, 36}, {32, 36}},
            {"RDW", "%", {11, 15}, {11, 15}},
            {"PLT", "x10^9/l", {150, 350}, {150, 350}},
            {"WBC", "x10^9/l", {4, 10}, {4, 10}},
        },
        "class");
    return schema;
}

void write_schema(std::ostream& out, const FeatureSchema& schema) {
    for (const FeatureDef& f : schema.features()) {
        out << f.name << ',' << f.unit << ',' << text::format_double(f.male.lower) << ','
            << text::format_double(f.male.upper) << ',' << text::format_double(f.female.lower) << ','
            << text::format_double(f.female.upper) << '\n';
    }
}

FeatureSchema read_schema(std::istream& in) {
    std::vector<FeatureDef> features;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = text::strip_cr(line);
        if (text::trim(line).empty() || text::trim(line).front() == '#') continue;
        const auto cells = text::split(line, ',');
        if (cells.size() != 6) {
            throw Error(ErrorCode::invalid_config,
                        "schema line " + std::to_string(line_no) + ": expected 6 fields");
        }
        double v[4];
        for (int k = 0; k < 4; ++k) {
            const auto parsed = text::parse_double(cells[2 + k]);
            if (!parsed) {
                throw Error(ErrorCode::invalid_config,
                            "schema line " + std::to_string(line_no) + ": bad number");
            }
            v[k] = *parsed;
        }
        features.push_back({std::string(text::trim(cells[0])), std::string(text::trim(cells[1])),
                            {v[0], v[1]}, {v[2], v[3]}});
    }
    return FeatureSchema(std::move(features), "class");
}

FeatureSchema load_schema(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::file_not_found, "cannot open schema file " + path.string());
    return read_schema(in);
}

}  // namespace fedscreen
