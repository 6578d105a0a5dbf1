#pragma once

#include <vector>

#include "fedscreen/dataset.hpp"
#include "fedscreen/schema.hpp"

namespace fedscreen::preprocess {

// Ordinal code of a measurement against its normal range [lo, hi]:
//   0       below the range
//   1..4    the four equal sub-ranges [lo + i*w, lo + (i+1)*w), w = (hi - lo) / 4,
//           with the top one closed so that hi itself is 4
//   5       above the range
int bin_value(double v, double lo, double hi);
inline int bin_value(double v, const Range& r) { return bin_value(v, r.lower, r.upper); }

// Children (< 18 years) are 0, adults 1.
int binarize_age(double age_years);

inline int binarize_gender(Gender g) { return g == Gender::male ? 1 : 0; }

// Bins every record with the sex-appropriate ranges. Input must be cleaned;
// errors carry the offending record index.
Dataset normalize_dataset(const std::vector<RawRecord>& raw, const FeatureSchema& schema);

}  // namespace fedscreen::preprocess
