#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>

#include "fedscreen/learners/decision_tree.hpp"
#include "fedscreen/learners/linear_svm.hpp"
#include "fedscreen/learners/naive_bayes.hpp"
#include "fedscreen/learners/samples.hpp"

namespace fedscreen::learn {

enum class ModelKind { dt, nb, svm };

std::string to_string(ModelKind k);
ModelKind parse_model_kind(const std::string& s);

struct LearnerHyper {
    TreeHyper dt;
    double nb_alpha = 1.0;
    SvmHyper svm;

    bool operator==(const LearnerHyper&) const = default;
};

struct LocalModelMeta {
    std::uint32_t client_id = 0;
    std::size_t train_size = 0;
    double train_accuracy = 0.0;  // fraction in [0, 1] on the client's own shard

    bool operator==(const LocalModelMeta&) const = default;
};

using ModelPayload = std::variant<DecisionTreeModel, NaiveBayesModel, LinearSvmModel>;

struct LocalModel {
    ModelPayload model;
    LocalModelMeta meta;

    ModelKind kind() const { return static_cast<ModelKind>(model.index()); }
    int predict(std::span<const double> x) const;

    bool operator==(const LocalModel&) const = default;
};

ModelPayload train_model(ModelKind kind, const Samples& data, const LearnerHyper& hyper);
int predict(const ModelPayload& model, std::span<const double> x);
double accuracy(const ModelPayload& model, const Samples& data);

}  // namespace fedscreen::learn
