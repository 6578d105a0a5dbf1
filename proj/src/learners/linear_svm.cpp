#include "fedscreen/learners/linear_svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fedscreen/error.hpp"
#include "fedscreen/rng.hpp"

namespace fedscreen::learn {

namespace {

constexpr double kSupportThreshold = 1e-8;
constexpr double kMinStep = 1e-12;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

std::string to_string(SvmEncoding e) { return e == SvmEncoding::ordinal ? "ordinal" : "one-hot"; }

SvmEncoding parse_svm_encoding(const std::string& s) {
    if (s == "ordinal") return SvmEncoding::ordinal;
    if (s == "one-hot" || s == "one_hot" || s == "onehot") return SvmEncoding::one_hot;
    throw Error(ErrorCode::invalid_config, "unknown SVM encoding '" + s + "'");
}

std::size_t encoded_dim(const std::vector<int>& cardinality, std::size_t dim, SvmEncoding enc) {
    if (enc == SvmEncoding::ordinal) return dim;
    return static_cast<std::size_t>(std::accumulate(cardinality.begin(), cardinality.end(), 0));
}

std::vector<double> encode_input(std::span<const double> x, const std::vector<int>& cardinality, SvmEncoding enc) {
    if (enc == SvmEncoding::ordinal) return {x.begin(), x.end()};
    std::vector<double> out(encoded_dim(cardinality, x.size(), enc), 0.0);
    std::size_t offset = 0;
    for (std::size_t f = 0; f < x.size(); ++f) {
        const auto v = static_cast<std::size_t>(x[f]);
        if (v < static_cast<std::size_t>(cardinality[f])) out[offset + v] = 1.0;
        offset += static_cast<std::size_t>(cardinality[f]);
    }
    return out;
}

std::vector<double> LinearSvmModel::encode(std::span<const double> x) const {
    return encode_input(x, cardinality, hyper.encoding);
}

double LinearSvmModel::decision(std::span<const double> x) const {
    if (hyper.encoding == SvmEncoding::ordinal) return dot(w, x) + b;
    const auto e = encode(x);
    return dot(w, e) + b;
}

double LinearSvmModel::decision_from_duals(std::span<const double> x) const {
    const auto e = encode(x);
    double s = 0.0;
    for (std::size_t i = 0; i < support_vectors.size(); ++i) s += dual_coefs[i] * dot(support_vectors[i], e);
    return s + b;
}

double LinearSvmModel::box() const {
    return train_size > 0 ? hyper.C / static_cast<double>(train_size) : hyper.C;
}

SvmFit fit_svm(const Samples& data, const SvmHyper& hyper, const SvmFitOptions& options) {
    if (data.empty()) throw Error(ErrorCode::empty_dataset, "SVM: no training rows");
    if (data.count_label(0) == 0 || data.count_label(1) == 0) {
        throw Error(ErrorCode::single_class_dataset, "SVM: training data must contain both classes");
    }
    if (hyper.kernel != "linear") throw Error(ErrorCode::invalid_config, "SVM: only the linear kernel is supported");
    if (!(hyper.C > 0.0) || !std::isfinite(hyper.C)) throw Error(ErrorCode::invalid_config, "SVM: C must be positive");
    if (hyper.encoding == SvmEncoding::one_hot) data.require_categorical();
    if (!options.initial_alpha.empty() && options.initial_alpha.size() != data.size()) {
        throw Error(ErrorCode::invalid_input, "SVM: warm start needs one dual value per row");
    }

    const std::size_t n = data.size();
    const std::size_t d = encoded_dim(data.cardinality, data.dim, hyper.encoding);
    const double upper = hyper.C / static_cast<double>(n);

    std::vector<double> xs;
    xs.reserve(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        const auto e = encode_input(data.row(i), data.cardinality, hyper.encoding);
        xs.insert(xs.end(), e.begin(), e.end());
    }
    auto x_of = [&](std::size_t i) { return std::span<const double>(xs.data() + i * d, d); };
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = data.labels[i] == 1 ? 1.0 : -1.0;

    // With an anchor g the primal optimum is w = (mu g + sum alpha y x) / (1 + mu).
    const double mu = options.prior ? options.prior->mu : 0.0;
    if (!(mu >= 0.0)) throw Error(ErrorCode::invalid_config, "SVM: proximal weight must be non-negative");
    const double scale = 1.0 / (1.0 + mu);
    std::vector<double> anchor_w(d, 0.0);
    double anchor_b = 0.0;
    if (options.prior) {
        if (options.prior->w.size() != d) throw Error(ErrorCode::invalid_input, "SVM: prior has wrong dimension");
        anchor_w = options.prior->w;
        anchor_b = options.prior->b;
    }

    std::vector<double> alpha(n, 0.0);
    for (std::size_t i = 0; i < options.initial_alpha.size(); ++i) {
        alpha[i] = std::clamp(options.initial_alpha[i], 0.0, upper);
    }

    auto rebuild = [&](std::vector<double>& w, double& b) {
        w.assign(d, 0.0);
        b = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (alpha[i] == 0.0) continue;
            const double c = alpha[i] * y[i];
            const auto x = x_of(i);
            for (std::size_t k = 0; k < d; ++k) w[k] += c * x[k];
            b += c;
        }
        for (std::size_t k = 0; k < d; ++k) w[k] = scale * (mu * anchor_w[k] + w[k]);
        b = scale * (mu * anchor_b + b);
    };

    std::vector<double> w;
    double b = 0.0;
    rebuild(w, b);

    std::vector<double> qd(n);
    for (std::size_t i = 0; i < n; ++i) qd[i] = scale * (dot(x_of(i), x_of(i)) + 1.0);

    Rng rng(hyper.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t epochs_run = 0;
    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        rng.shuffle(order);
        double pg_max = -std::numeric_limits<double>::infinity();
        double pg_min = std::numeric_limits<double>::infinity();
        for (std::size_t i : order) {
            const auto x = x_of(i);
            const double g = y[i] * (dot(w, x) + b) - 1.0;
            double pg = g;
            if (alpha[i] == 0.0) {
                pg = std::min(g, 0.0);
            } else if (alpha[i] == upper) {
                pg = std::max(g, 0.0);
            }
            pg_max = std::max(pg_max, pg);
            pg_min = std::min(pg_min, pg);
            if (std::abs(pg) <= kMinStep) continue;
            const double old = alpha[i];
            alpha[i] = std::clamp(old - g / qd[i], 0.0, upper);
            const double step = scale * (alpha[i] - old) * y[i];
            for (std::size_t k = 0; k < d; ++k) w[k] += step * x[k];
            b += step;
        }
        ++epochs_run;
        if (pg_max - pg_min <= hyper.tolerance) break;
    }

    // Negligible duals are dropped so that (w, b) is exactly the expansion
    // over the recorded support vectors. Recomputing also sheds incremental
    // rounding.
    for (double& a : alpha) {
        if (a <= kSupportThreshold) a = 0.0;
    }
    rebuild(w, b);

    SvmFit fit;
    LinearSvmModel& m = fit.model;
    m.w = std::move(w);
    m.b = b;
    m.train_size = n;
    m.cardinality = data.cardinality;
    m.hyper = hyper;
    if (!options.prior) {
        for (std::size_t i = 0; i < n; ++i) {
            if (alpha[i] == 0.0) continue;
            const auto x = x_of(i);
            m.support_vectors.emplace_back(x.begin(), x.end());
            m.dual_coefs.push_back(alpha[i] * y[i]);
            m.support_indices.push_back(i);
        }
    }
    fit.alpha = std::move(alpha);
    fit.epochs_run = epochs_run;
    return fit;
}

}  // namespace fedscreen::learn
