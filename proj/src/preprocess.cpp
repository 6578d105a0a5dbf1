#include "fedscreen/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedscreen/error.hpp"

namespace fedscreen::preprocess {

int bin_value(double v, double lo, double hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
        throw Error(ErrorCode::invalid_range, "bin_value: need lo < hi");
    }
    if (!std::isfinite(v)) throw Error(ErrorCode::non_finite_value, "bin_value: value is not finite");
    if (v < lo) return 0;
    if (v > hi) return 5;
    const double quarter = std::floor((v - lo) * 4.0 / (hi - lo));
    return 1 + static_cast<int>(std::min(3.0, quarter));
}

int binarize_age(double age_years) {
    if (std::isnan(age_years) || age_years < 0.0) {
        throw Error(ErrorCode::negative_age, "age must be non-negative");
    }
    return age_years < 18.0 ? 0 : 1;
}

Dataset normalize_dataset(const std::vector<RawRecord>& raw, const FeatureSchema& schema) {
    Dataset out;
    out.schema = schema;
    out.records.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const RawRecord& r = raw[i];
        try {
            if (!r.complete()) throw Error(ErrorCode::missing_value, "record has missing values");
            BinnedRecord b;
            for (std::size_t f = 0; f < kCbcCount; ++f) {
                b.bins[f] = static_cast<std::uint8_t>(bin_value(*r.cbc[f], schema[f].range_for(*r.gender)));
            }
            b.gender_bin = static_cast<std::uint8_t>(binarize_gender(*r.gender));
            b.age_bin = static_cast<std::uint8_t>(binarize_age(*r.age_years));
            b.label = static_cast<std::uint8_t>(*r.label);
            out.records.push_back(b);
        } catch (const Error& e) {
            throw e.with_context("record " + std::to_string(i) + ": ");
        }
    }
    return out;
}

}  // namespace fedscreen::preprocess
