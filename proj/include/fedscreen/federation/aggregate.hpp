#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedscreen/dataset.hpp"
#include "fedscreen/federation/global_model.hpp"
#include "fedscreen/learners/local_model.hpp"
#include "fedscreen/metrics.hpp"

namespace fedscreen::fed {

// Trains one client's local model on its own shard and fills the metadata.
// Learner errors are rethrown prefixed with "client <id>: ".
learn::LocalModel client_train(std::uint32_t client_id, const Dataset& shard, learn::ModelKind kind,
                               const learn::LearnerHyper& hyper);

struct AggregationReport {
    std::size_t svm_locals = 0;
    std::size_t dt_locals = 0;
    std::size_t nb_locals = 0;
    std::size_t concatenated_support_vectors = 0;
    std::size_t global_dataset_size = 0;
    std::string kernel;
    double gamma = 0.0;
    std::optional<std::uint32_t> svm_donor;  // client whose kernel/gamma were copied
    std::optional<learn::TreeHyper> dt_settings;
    std::optional<std::uint32_t> dt_donor;
    std::size_t retrain_epochs = 0;
    std::vector<std::string> notes;

    bool operator==(const AggregationReport&) const = default;
};

struct Paper13Result {
    GlobalModel global;
    AggregationReport report;
};

// The thirteen-step global model, steps 2 to 9. `locals[i]` must have been
// trained on `shards[i]`; client order is the order of `locals`.
// `hyper` configures the global SVM; its kernel, gamma and encoding are
// overwritten by the first SVM local when one exists. epochs = 0 skips the
// retraining and returns the averaged warm start.
Paper13Result aggregate_paper13(const std::vector<learn::LocalModel>& locals, const std::vector<Dataset>& shards,
                                const learn::SvmHyper& hyper);

struct FedAvgHyper {
    learn::SvmHyper svm;
    // Weight of the proximal pull toward the broadcast global during local
    // retraining; must be positive.
    double prox_mu = 0.1;

    bool operator==(const FedAvgHyper&) const = default;
};

// A FedAvg participant. Keeps its shard and dual variables private; only
// (w, b) leaves through update().
class FedAvgClient {
public:
    FedAvgClient(std::uint32_t client_id, Dataset shard, FedAvgHyper hyper);

    std::uint32_t id() const { return id_; }
    std::size_t size() const { return samples_.size(); }

    // Retrains from `global` and returns a model with no support vectors.
    learn::LocalModel update(const GlobalModel& global);
    metrics::ConfusionMatrix evaluate(const GlobalModel& global) const;

private:
    std::uint32_t id_;
    Dataset shard_;
    learn::Samples samples_;
    FedAvgHyper hyper_;
    std::vector<double> alpha_;
    std::size_t rounds_ = 0;
};

// Zero-weight model of the right dimension, round_count 0.
GlobalModel initial_global(const learn::SvmHyper& hyper);

// Shard-size-weighted mean of client (w, b). Throws heterogeneous_models
// unless every update is a linear SVM of the same dimension and encoding.
GlobalModel fedavg_average(const std::vector<learn::LocalModel>& updates, std::size_t round);

struct FedAvgResult {
    GlobalModel global;
    metrics::RoundLog log;
    std::vector<GlobalModel> history;  // global after each round
};

struct ClientShard {
    std::uint32_t client_id = 0;
    Dataset shard;
};

// Synchronous rounds without a transport. Client i trains with seed
// derive_seed(hyper.svm.seed, client_id).
FedAvgResult fedavg_rounds(const std::vector<ClientShard>& clients, const Dataset& val, std::size_t rounds,
                           const FedAvgHyper& hyper);

}  // namespace fedscreen::fed
