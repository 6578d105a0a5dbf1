#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedscreen/learners/samples.hpp"

namespace fedscreen::learn {

enum class SvmEncoding { ordinal, one_hot };

std::string to_string(SvmEncoding e);
SvmEncoding parse_svm_encoding(const std::string& s);

struct SvmHyper {
    std::string kernel = "linear";
    double gamma = 0.0;  // carried with the model; the linear kernel ignores it
    double C = 1.0;
    std::size_t epochs = 50;
    // Early stop once the projected-gradient spread of an epoch falls below this.
    double tolerance = 1e-10;
    std::uint64_t seed = 0;
    SvmEncoding encoding = SvmEncoding::ordinal;

    bool operator==(const SvmHyper&) const = default;
};

// Soft-margin linear SVM. The bias is carried as an extra constant input of
// 1, so b = sum(dual_coefs) and
//   f(x) = w . enc(x) + b = sum_i dual_coefs[i] * (sv_i . enc(x)) + b.
// Support vectors live in the encoded input space.
struct LinearSvmModel {
    std::vector<double> w;
    double b = 0.0;
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> dual_coefs;              // alpha_i * y_i, y in {-1, +1}
    std::vector<std::size_t> support_indices;    // training row of each support vector
    std::size_t train_size = 0;
    std::vector<int> cardinality;                // input categories, for one-hot encoding
    SvmHyper hyper;

    std::vector<double> encode(std::span<const double> x) const;
    double decision(std::span<const double> x) const;
    double decision_from_duals(std::span<const double> x) const;
    int predict(std::span<const double> x) const { return decision(x) >= 0.0 ? 1 : 0; }

    // Upper bound of each dual variable: C / train_size.
    double box() const;
    // False for models exchanged as (w, b) only.
    bool has_expansion() const { return !dual_coefs.empty(); }

    bool operator==(const LinearSvmModel&) const = default;
};

std::size_t encoded_dim(const std::vector<int>& cardinality, std::size_t dim, SvmEncoding enc);
std::vector<double> encode_input(std::span<const double> x, const std::vector<int>& cardinality, SvmEncoding enc);

// Anchor for proximal local training: adds mu/2 * ||(w,b) - (anchor_w, anchor_b)||^2
// to the primal objective.
struct SvmPrior {
    std::vector<double> w;
    double b = 0.0;
    double mu = 0.0;
};

struct SvmFitOptions {
    std::vector<double> initial_alpha;  // empty, or one value per training row
    std::optional<SvmPrior> prior;
};

struct SvmFit {
    LinearSvmModel model;
    std::vector<double> alpha;
    std::size_t epochs_run = 0;
};

// Dual coordinate ascent on
//   min 1/2 ||(w,b)||^2 + (C/n) sum_i max(0, 1 - y_i (w . x_i + b))
// visiting samples in a seeded random order each epoch. Dual variables are
// clipped to [0, C/n]. With a prior the returned model holds no expansion,
// since w then also contains the anchor.
SvmFit fit_svm(const Samples& data, const SvmHyper& hyper, const SvmFitOptions& options = {});

inline LinearSvmModel train_svm(const Samples& data, const SvmHyper& hyper = {}) {
    return fit_svm(data, hyper).model;
}

}  // namespace fedscreen::learn
