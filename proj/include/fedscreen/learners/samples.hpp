#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fedscreen/dataset.hpp"

namespace fedscreen::learn {

// Row-major design matrix with 0/1 labels. `cardinality` gives, per column,
// the number of categories the categorical learners may see (values must be
// integers in [0, cardinality)); the SVM reads the same values as numerics.
struct Samples {
    std::size_t dim = 0;
    std::vector<double> values;
    std::vector<int> labels;
    std::vector<int> cardinality;

    Samples() = default;
    Samples(std::size_t dim_, std::vector<int> cardinality_)
        : dim(dim_), cardinality(std::move(cardinality_)) {}

    std::size_t size() const { return labels.size(); }
    bool empty() const { return labels.empty(); }

    std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }

    void add(std::span<const double> x, int label) {
        values.insert(values.end(), x.begin(), x.end());
        labels.push_back(label);
    }

    std::size_t count_label(int label) const;

    // Throws invalid_input when any value is not an integer category.
    void require_categorical() const;
};

Samples to_samples(const Dataset& data);
std::vector<double> to_input(const FeatureVector& v);
std::vector<double> to_input(const BinnedRecord& r);

}  // namespace fedscreen::learn
