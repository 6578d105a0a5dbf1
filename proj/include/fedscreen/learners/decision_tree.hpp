#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fedscreen/learners/samples.hpp"

namespace fedscreen::learn {

// Shannon entropy in bits, with 0 log 0 taken as 0.
double entropy(std::span<const double> class_probs);

struct TreeHyper {
    std::string criterion = "entropy";
    std::size_t max_depth = 8;
    std::size_t min_leaf = 5;

    bool operator==(const TreeHyper&) const = default;
};

struct TreeNode {
    int feature = -1;  // split feature, -1 on leaves
    std::array<std::size_t, 2> class_counts{};
    int majority = 0;  // ties go to class 0
    double gain = 0.0;
    std::vector<std::pair<int, std::size_t>> children;  // (category, node index), ascending

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

// Multiway ID3 tree over categorical features. nodes[0] is the root.
struct DecisionTreeModel {
    std::size_t dim = 0;
    std::vector<TreeNode> nodes;
    TreeHyper hyper;
    std::vector<double> feature_importances;

    int predict(std::span<const double> x) const;
    std::size_t depth() const;

    bool operator==(const DecisionTreeModel&) const = default;
};

// Greedy splits on the feature with the largest information gain (lowest
// index on ties). A split is admissible only if every child it creates holds
// at least min_leaf rows. Growth stops at max_depth, on pure nodes and when no
// admissible split has positive gain.
DecisionTreeModel train_dt(const Samples& data, const TreeHyper& hyper = {});

// Information gain of splitting `rows` on `feature`; exposed for tests.
double information_gain(const Samples& data, std::span<const std::size_t> rows, std::size_t feature);

}  // namespace fedscreen::learn
