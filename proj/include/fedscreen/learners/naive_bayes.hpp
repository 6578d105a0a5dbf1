#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "fedscreen/learners/samples.hpp"

namespace fedscreen::learn {

// Categorical naive Bayes with additive (Laplace) smoothing.
struct NaiveBayesModel {
    std::array<double, 2> class_log_priors{};
    // cond_log_prob[class][feature][category]
    std::array<std::vector<std::vector<double>>, 2> cond_log_prob;
    std::vector<int> cardinality;
    double laplace_alpha = 1.0;

    struct Prediction {
        int label = 0;
        std::array<double, 2> posterior{};
    };

    // Largest log joint wins; ties (within 1e-12) go to class 0.
    Prediction predict_with_posterior(std::span<const double> x) const;
    int predict(std::span<const double> x) const { return predict_with_posterior(x).label; }

    bool operator==(const NaiveBayesModel&) const = default;
};

// P(y) = count_y / n and
// P(x_f = v | y) = (count(v, y) + alpha) / (count_y + alpha * cardinality_f).
NaiveBayesModel train_nb(const Samples& data, double alpha = 1.0);

}  // namespace fedscreen::learn
