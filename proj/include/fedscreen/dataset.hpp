#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedscreen/schema.hpp"

namespace fedscreen {

enum class Label : int { non_carrier = 0, carrier = 1 };

// A patient row as read from the source file. Missing cells are nullopt.
struct RawRecord {
    std::optional<double> age_years;
    std::optional<Gender> gender;
    std::array<std::optional<double>, kCbcCount> cbc{};  // schema order
    std::optional<Label> label;

    bool complete() const;
    bool operator==(const RawRecord&) const = default;
};

struct BinnedRecord {
    std::array<std::uint8_t, kCbcCount> bins{};  // each in [0, 5]
    std::uint8_t gender_bin = 0;
    std::uint8_t age_bin = 0;
    std::uint8_t label = 0;

    bool valid() const;
    bool operator==(const BinnedRecord&) const = default;
    auto operator<=>(const BinnedRecord&) const = default;
};

using FeatureVector = std::array<int, kFeatureCount>;

// [bins..., gender_bin, age_bin]
FeatureVector feature_vector(const BinnedRecord& rec);

// Number of distinct values each feature position can take (6 for CBC bins,
// 2 for gender and age).
std::vector<int> feature_cardinality();

struct Dataset {
    FeatureSchema schema = default_schema();
    std::vector<BinnedRecord> records;
    std::string provenance;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
    std::size_t count_label(int label) const;

    bool operator==(const Dataset&) const = default;
};

}  // namespace fedscreen
