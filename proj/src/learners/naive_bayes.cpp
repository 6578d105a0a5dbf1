#include "fedscreen/learners/naive_bayes.hpp"

#include <cmath>
#include <limits>

#include "fedscreen/error.hpp"

namespace fedscreen::learn {

NaiveBayesModel train_nb(const Samples& data, double alpha) {
    if (data.empty()) throw Error(ErrorCode::empty_dataset, "naive Bayes: no training rows");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw Error(ErrorCode::negative_alpha, "naive Bayes: smoothing alpha must be non-negative");
    }
    data.require_categorical();

    NaiveBayesModel m;
    m.cardinality = data.cardinality;
    m.laplace_alpha = alpha;

    std::array<std::vector<std::vector<std::size_t>>, 2> counts;
    for (auto& per_class : counts) {
        per_class.resize(data.dim);
        for (std::size_t f = 0; f < data.dim; ++f) per_class[f].assign(static_cast<std::size_t>(data.cardinality[f]), 0);
    }
    std::array<std::size_t, 2> class_count{0, 0};
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto y = static_cast<std::size_t>(data.labels[i]);
        ++class_count[y];
        const auto x = data.row(i);
        for (std::size_t f = 0; f < data.dim; ++f) ++counts[y][f][static_cast<std::size_t>(x[f])];
    }

    const double n = static_cast<double>(data.size());
    for (std::size_t y = 0; y < 2; ++y) {
        m.class_log_priors[y] = std::log(static_cast<double>(class_count[y]) / n);
        m.cond_log_prob[y].resize(data.dim);
        for (std::size_t f = 0; f < data.dim; ++f) {
            const double card = static_cast<double>(data.cardinality[f]);
            const double denom = static_cast<double>(class_count[y]) + alpha * card;
            auto& out = m.cond_log_prob[y][f];
            out.resize(counts[y][f].size());
            for (std::size_t v = 0; v < out.size(); ++v) {
                // An unseen class with alpha = 0 has no estimate; its prior is
                // zero anyway, so any proper distribution will do.
                out[v] = denom > 0.0 ? std::log((static_cast<double>(counts[y][f][v]) + alpha) / denom)
                                     : -std::log(card);
            }
        }
    }
    return m;
}

namespace {
constexpr double kTieTolerance = 1e-12;
}

NaiveBayesModel::Prediction NaiveBayesModel::predict_with_posterior(std::span<const double> x) const {
    std::array<double, 2> joint{};
    for (std::size_t y = 0; y < 2; ++y) {
        double s = class_log_priors[y];
        for (std::size_t f = 0; f < cardinality.size(); ++f) {
            s += cond_log_prob[y][f][static_cast<std::size_t>(x[f])];
        }
        joint[y] = s;
    }
    Prediction p;
    // rounding in the log sums can split an exact tie
    p.label = joint[1] - joint[0] > kTieTolerance ? 1 : 0;
    const double top = std::max(joint[0], joint[1]);
    if (top == -std::numeric_limits<double>::infinity()) {
        p.posterior = {0.5, 0.5};
        return p;
    }
    const double e0 = std::exp(joint[0] - top);
    const double e1 = std::exp(joint[1] - top);
    p.posterior = {e0 / (e0 + e1), e1 / (e0 + e1)};
    return p;
}

}  // namespace fedscreen::learn
