#include "fedscreen/dataset.hpp"

#include <algorithm>

namespace fedscreen {

bool RawRecord::complete() const {
    return age_years && gender && label &&
           std::all_of(cbc.begin(), cbc.end(), [](const auto& v) { return v.has_value(); });
}

bool BinnedRecord::valid() const {
    return std::all_of(bins.begin(), bins.end(), [](std::uint8_t b) { return b <= 5; }) &&
           gender_bin <= 1 && age_bin <= 1 && label <= 1;
}

FeatureVector feature_vector(const BinnedRecord& rec) {
    FeatureVector v{};
    for (std::size_t i = 0; i < kCbcCount; ++i) v[i] = rec.bins[i];
    v[kGenderIndex] = rec.gender_bin;
    v[kAgeIndex] = rec.age_bin;
    return v;
}

std::vector<int> feature_cardinality() {
    std::vector<int> card(kFeatureCount, 6);
    card[kGenderIndex] = 2;
    card[kAgeIndex] = 2;
    return card;
}

std::size_t Dataset::count_label(int label) const {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [label](const BinnedRecord& r) {
        return r.label == label;
    }));
}

}  // namespace fedscreen
