#include "fedscreen/learners/samples.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedscreen/error.hpp"

namespace fedscreen::learn {

std::size_t Samples::count_label(int label) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

void Samples::require_categorical() const {
    if (cardinality.size() != dim) {
        throw Error(ErrorCode::invalid_input, "categorical learner needs a cardinality per feature");
    }
    for (std::size_t i = 0; i < size(); ++i) {
        const auto x = row(i);
        for (std::size_t f = 0; f < dim; ++f) {
            const double v = x[f];
            if (v != std::floor(v) || v < 0.0 || v >= cardinality[f]) {
                throw Error(ErrorCode::invalid_input, "row " + std::to_string(i) + " feature " + std::to_string(f) +
                                                          " is not a category below " +
                                                          std::to_string(cardinality[f]));
            }
        }
    }
    for (int y : labels) {
        if (y != 0 && y != 1) throw Error(ErrorCode::invalid_input, "labels must be 0 or 1");
    }
}

std::vector<double> to_input(const FeatureVector& v) { return std::vector<double>(v.begin(), v.end()); }

std::vector<double> to_input(const BinnedRecord& r) { return to_input(feature_vector(r)); }

Samples to_samples(const Dataset& data) {
    Samples s(kFeatureCount, feature_cardinality());
    s.values.reserve(data.size() * kFeatureCount);
    s.labels.reserve(data.size());
    for (const BinnedRecord& r : data.records) {
        const FeatureVector v = feature_vector(r);
        for (int x : v) s.values.push_back(x);
        s.labels.push_back(r.label);
    }
    return s;
}

}  // namespace fedscreen::learn
