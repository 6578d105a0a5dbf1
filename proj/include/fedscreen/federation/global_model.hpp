#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fedscreen/dataset.hpp"
#include "fedscreen/learners/linear_svm.hpp"
#include "fedscreen/metrics.hpp"

namespace fedscreen::fed {

enum class AggregationMode { paper13, fedavg };

std::string to_string(AggregationMode m);
AggregationMode parse_aggregation_mode(const std::string& s);

struct GlobalProvenance {
    AggregationMode mode = AggregationMode::paper13;
    std::size_t round_count = 0;  // 0 means not yet trained
    std::vector<std::uint32_t> client_ids;
    std::size_t total_examples = 0;

    bool operator==(const GlobalProvenance&) const = default;
};

struct GlobalModel {
    learn::LinearSvmModel svm;
    // Mean decision-tree importances; diagnostic only, never used to predict.
    std::optional<std::vector<double>> mean_feature_importances;
    GlobalProvenance provenance;

    bool trained() const { return provenance.round_count > 0; }
    int predict(std::span<const double> x) const { return svm.predict(x); }

    bool operator==(const GlobalModel&) const = default;
};

nlohmann::json to_json(const GlobalModel& g);
GlobalModel global_model_from_json(const nlohmann::json& j);

std::string dump_global(const GlobalModel& g);
GlobalModel parse_global(std::string_view text);
void save_global(const std::filesystem::path& path, const GlobalModel& g);
GlobalModel load_global(const std::filesystem::path& path);

metrics::ConfusionMatrix confusion_on(const GlobalModel& g, const Dataset& data);

// Predicts every row with the global SVM. Throws empty_input on an empty set.
metrics::EvalReport evaluate_global(const GlobalModel& g, const Dataset& test,
                                    metrics::SplitTag tag = metrics::SplitTag::validation);

}  // namespace fedscreen::fed
