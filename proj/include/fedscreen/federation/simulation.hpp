#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "fedscreen/dataset.hpp"
#include "fedscreen/federation/aggregate.hpp"
#include "fedscreen/federation/global_model.hpp"
#include "fedscreen/federation/message.hpp"
#include "fedscreen/ingest.hpp"
#include "fedscreen/learners/local_model.hpp"
#include "fedscreen/metrics.hpp"
#include "fedscreen/synthgen.hpp"

namespace fedscreen::fed {

enum class TransportKind { inproc, tcp };

std::string to_string(TransportKind t);
TransportKind parse_transport(const std::string& s);

// Seeds: the run seed drives generation and the train/validation split;
// derive_seed(seed, 1) the client partition, derive_seed(seed, 2) the global
// SVM and derive_seed(seed, 100 + id) client id's learner.
struct SimulationConfig {
    std::optional<std::filesystem::path> input;  // synthetic data when absent
    FeatureSchema schema = default_schema();
    synth::GenConfig gen;                        // gen.seed is replaced by `seed`
    ingest::MissingMode missing = ingest::MissingMode::drop;
    double train_fraction = 0.7;
    std::size_t clients = 3;
    std::vector<learn::ModelKind> kinds{learn::ModelKind::dt, learn::ModelKind::nb, learn::ModelKind::svm};
    AggregationMode mode = AggregationMode::paper13;
    std::size_t rounds = 10;  // fedavg only
    learn::LearnerHyper hyper;
    double prox_mu = 0.1;
    TransportKind transport = TransportKind::inproc;
    std::uint16_t port = 7461;
    std::uint64_t seed = 42;

    // Kind of client `id` (1-based): kinds assigned round-robin.
    learn::ModelKind kind_of(std::uint32_t id) const { return kinds[(id - 1) % kinds.size()]; }
    void validate() const;
};

struct LocalSummary {
    std::uint32_t client_id = 0;
    learn::ModelKind kind = learn::ModelKind::svm;
    std::size_t train_size = 0;
    double train_accuracy_pct = 0.0;
    metrics::EvalReport validation;
};

struct SimulationResult {
    GlobalModel global;
    metrics::EvalReport validation;
    metrics::EvalReport training;
    metrics::RoundLog log;
    std::vector<learn::LocalModel> locals;  // last model each client sent
    std::vector<LocalSummary> local_summaries;
    std::optional<AggregationReport> aggregation;  // paper13 only
    ingest::CleaningReport cleaning;
    std::size_t train_size = 0;
    std::size_t val_size = 0;
    std::vector<std::size_t> shard_sizes;
    std::array<std::size_t, kMessageTypeCount> messages_sent{};  // indexed like Message
    std::size_t shard_messages = 0;
};

// Errors carry the failing stage: config, ingest, clean, preprocess, split,
// train (client-side) or federation.
SimulationResult run_simulation(const SimulationConfig& cfg);

}  // namespace fedscreen::fed
