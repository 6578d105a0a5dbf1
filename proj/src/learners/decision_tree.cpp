#include "fedscreen/learners/decision_tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedscreen/error.hpp"

namespace fedscreen::learn {

namespace {

constexpr double kGainEpsilon = 1e-12;

double entropy_of_counts(std::size_t c0, std::size_t c1) {
    const double n = static_cast<double>(c0 + c1);
    double h = 0.0;
    for (std::size_t c : {c0, c1}) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    return h;
}

struct SplitCounts {
    std::vector<std::array<std::size_t, 2>> per_value;
};

SplitCounts count_split(const Samples& data, std::span<const std::size_t> rows, std::size_t feature) {
    SplitCounts s;
    s.per_value.assign(static_cast<std::size_t>(data.cardinality[feature]), {0, 0});
    for (std::size_t r : rows) {
        const auto v = static_cast<std::size_t>(data.row(r)[feature]);
        ++s.per_value[v][static_cast<std::size_t>(data.labels[r])];
    }
    return s;
}

double gain_of(const SplitCounts& s, std::size_t c0, std::size_t c1) {
    const double n = static_cast<double>(c0 + c1);
    double children = 0.0;
    for (const auto& c : s.per_value) {
        const std::size_t m = c[0] + c[1];
        if (m > 0) children += static_cast<double>(m) / n * entropy_of_counts(c[0], c[1]);
    }
    return entropy_of_counts(c0, c1) - children;
}

class Builder {
public:
    Builder(const Samples& data, const TreeHyper& hyper, DecisionTreeModel& model)
        : data_(data), hyper_(hyper), model_(model), root_size_(static_cast<double>(data.size())) {}

    std::size_t grow(std::vector<std::size_t> rows, std::size_t depth) {
        const std::size_t id = model_.nodes.size();
        model_.nodes.emplace_back();
        TreeNode node;
        for (std::size_t r : rows) ++node.class_counts[static_cast<std::size_t>(data_.labels[r])];
        node.majority = node.class_counts[1] > node.class_counts[0] ? 1 : 0;

        const bool pure = node.class_counts[0] == 0 || node.class_counts[1] == 0;
        int best_feature = -1;
        double best_gain = kGainEpsilon;
        SplitCounts best_counts;
        if (!pure && depth < hyper_.max_depth) {
            for (std::size_t f = 0; f < data_.dim; ++f) {
                SplitCounts counts = count_split(data_, rows, f);
                std::size_t non_empty = 0;
                bool admissible = true;
                for (const auto& c : counts.per_value) {
                    const std::size_t m = c[0] + c[1];
                    if (m == 0) continue;
                    ++non_empty;
                    if (m < hyper_.min_leaf) admissible = false;
                }
                if (!admissible || non_empty < 2) continue;
                const double g = gain_of(counts, node.class_counts[0], node.class_counts[1]);
                if (g > best_gain) {
                    best_gain = g;
                    best_feature = static_cast<int>(f);
                    best_counts = std::move(counts);
                }
            }
        }

        if (best_feature >= 0) {
            node.feature = best_feature;
            node.gain = best_gain;
            model_.feature_importances[static_cast<std::size_t>(best_feature)] +=
                static_cast<double>(rows.size()) / root_size_ * best_gain;
            std::vector<std::vector<std::size_t>> parts(best_counts.per_value.size());
            for (std::size_t r : rows) {
                parts[static_cast<std::size_t>(data_.row(r)[static_cast<std::size_t>(best_feature)])].push_back(r);
            }
            rows.clear();
            rows.shrink_to_fit();
            for (std::size_t v = 0; v < parts.size(); ++v) {
                if (parts[v].empty()) continue;
                const std::size_t child = grow(std::move(parts[v]), depth + 1);
                node.children.emplace_back(static_cast<int>(v), child);
            }
        }
        model_.nodes[id] = std::move(node);
        return id;
    }

private:
    const Samples& data_;
    const TreeHyper& hyper_;
    DecisionTreeModel& model_;
    double root_size_;
};

}  // namespace

double entropy(std::span<const double> class_probs) {
    if (class_probs.empty()) throw Error(ErrorCode::not_a_distribution, "entropy of an empty distribution");
    double sum = 0.0;
    for (double p : class_probs) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw Error(ErrorCode::not_a_distribution, "probabilities must be finite and non-negative");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::not_a_distribution, "probabilities must sum to 1");
    double h = 0.0;
    for (double p : class_probs) {
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h;
}

double information_gain(const Samples& data, std::span<const std::size_t> rows, std::size_t feature) {
    std::size_t c[2] = {0, 0};
    for (std::size_t r : rows) ++c[static_cast<std::size_t>(data.labels[r])];
    return gain_of(count_split(data, rows, feature), c[0], c[1]);
}

DecisionTreeModel train_dt(const Samples& data, const TreeHyper& hyper) {
    if (data.empty()) throw Error(ErrorCode::empty_dataset, "decision tree: no training rows");
    if (hyper.criterion != "entropy") {
        throw Error(ErrorCode::invalid_config, "decision tree: only the entropy criterion is supported");
    }
    data.require_categorical();

    DecisionTreeModel model;
    model.dim = data.dim;
    model.hyper = hyper;
    model.feature_importances.assign(data.dim, 0.0);
    std::vector<std::size_t> rows(data.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    Builder(data, hyper, model).grow(std::move(rows), 0);

    const double total = std::accumulate(model.feature_importances.begin(), model.feature_importances.end(), 0.0);
    if (total > 0.0) {
        for (double& v : model.feature_importances) v /= total;
    }
    return model;
}

int DecisionTreeModel::predict(std::span<const double> x) const {
    std::size_t id = 0;
    for (;;) {
        const TreeNode& node = nodes[id];
        if (node.is_leaf()) return node.majority;
        const int v = static_cast<int>(x[static_cast<std::size_t>(node.feature)]);
        auto it = std::find_if(node.children.begin(), node.children.end(),
                               [v](const auto& c) { return c.first == v; });
        if (it == node.children.end()) return node.majority;
        id = it->second;
    }
}

std::size_t DecisionTreeModel::depth() const {
    std::vector<std::size_t> d(nodes.size(), 0);
    std::size_t deepest = 0;
    // Children always have larger indices than their parent.
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        deepest = std::max(deepest, d[i]);
        for (const auto& c : nodes[i].children) d[c.second] = d[i] + 1;
    }
    return deepest;
}

}  // namespace fedscreen::learn
