#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fedscreen {

enum class Gender : int { female = 0, male = 1 };

struct Range {
    double lower = 0.0;
    double upper = 0.0;

    bool operator==(const Range&) const = default;
};

struct FeatureDef {
    std::string name;
    std::string unit;
    Range male;
    Range female;  // equal to `male` unless the analyte has sex-specific limits

    const Range& range_for(Gender g) const { return g == Gender::male ? male : female; }

    bool operator==(const FeatureDef&) const = default;
};

// The nine CBC analytes in their fixed order, followed implicitly by gender
// and age. The order is part of the model file format: feature vectors, model
// weights and tree split indices all refer to positions in it.
inline constexpr std::size_t kCbcCount = 9;
inline constexpr std::size_t kFeatureCount = kCbcCount + 2;
inline constexpr std::size_t kGenderIndex = kCbcCount;
inline constexpr std::size_t kAgeIndex = kCbcCount + 1;

inline constexpr std::string_view kCbcNames[kCbcCount] = {
    "RBC", "HB", "HCT", "MCV", "MCH", "MCHC", "RDW", "PLT", "WBC"};

class FeatureSchema {
public:
    FeatureSchema() = default;
    FeatureSchema(std::vector<FeatureDef> features, std::string class_name);

    const std::vector<FeatureDef>& features() const { return features_; }
    const std::string& class_name() const { return class_name_; }

    const FeatureDef& operator[](std::size_t i) const { return features_.at(i); }
    const FeatureDef& operator[](std::string_view name) const;

    // Case-insensitive lookup; returns kCbcCount when absent.
    std::size_t index_of(std::string_view name) const;

    bool operator==(const FeatureSchema&) const = default;

private:
    std::vector<FeatureDef> features_;
    std::string class_name_ = "class";
};

// Reference ranges used to bin CBC values.
const FeatureSchema& default_schema();

// One feature per line: name,unit,lo_male,hi_male,lo_female,hi_female.
// Numbers are written in shortest round-trip form.
void write_schema(std::ostream& out, const FeatureSchema& schema);
FeatureSchema read_schema(std::istream& in);
FeatureSchema load_schema(const std::filesystem::path& path);

}  // namespace fedscreen
