#include "fedscreen/federation/aggregate.hpp"

#include <cmath>
#include <numeric>

#include "fedscreen/error.hpp"
#include "fedscreen/rng.hpp"

namespace fedscreen::fed {

namespace {

std::string client_prefix(std::uint32_t id) { return "client " + std::to_string(id) + ": "; }

}  // namespace

learn::LocalModel client_train(std::uint32_t client_id, const Dataset& shard, learn::ModelKind kind,
                               const learn::LearnerHyper& hyper) {
    try {
        if (shard.empty()) throw Error(ErrorCode::empty_dataset, "shard is empty");
        const learn::Samples samples = learn::to_samples(shard);
        learn::LocalModel m;
        m.model = learn::train_model(kind, samples, hyper);
        m.meta.client_id = client_id;
        m.meta.train_size = samples.size();
        m.meta.train_accuracy = learn::accuracy(m.model, samples);
        return m;
    } catch (const Error& e) {
        throw e.with_context(client_prefix(client_id));
    }
}

Paper13Result aggregate_paper13(const std::vector<learn::LocalModel>& locals, const std::vector<Dataset>& shards,
                                const learn::SvmHyper& hyper) {
    if (locals.empty()) throw Error(ErrorCode::invalid_input, "aggregate: no local models");
    if (shards.size() != locals.size()) {
        throw Error(ErrorCode::invalid_input, "aggregate: need one shard per local model");
    }
    const std::size_t total = std::accumulate(shards.begin(), shards.end(), std::size_t{0},
                                              [](std::size_t s, const Dataset& d) { return s + d.size(); });
    if (total == 0) throw Error(ErrorCode::empty_shards, "aggregate: every shard is empty");

    Paper13Result out;
    AggregationReport& rep = out.report;
    GlobalModel& g = out.global;

    // Step 1 happened on the clients. Step 2: a linear SVM, hyperparameters
    // from the caller until step 7 overrides them.
    learn::SvmHyper gh = hyper;
    const learn::LinearSvmModel* donor = nullptr;
    std::vector<std::size_t> svm_idx;
    std::vector<const learn::DecisionTreeModel*> trees;
    for (std::size_t i = 0; i < locals.size(); ++i) {
        switch (locals[i].kind()) {
            case learn::ModelKind::svm: {
                const auto& m = std::get<learn::LinearSvmModel>(locals[i].model);
                if (!donor) {
                    donor = &m;
                    rep.svm_donor = locals[i].meta.client_id;
                } else if (m.w.size() != donor->w.size() || m.hyper.encoding != donor->hyper.encoding) {
                    throw Error(ErrorCode::heterogeneous_models, "aggregate: SVM locals differ in input encoding");
                }
                svm_idx.push_back(i);
                break;
            }
            case learn::ModelKind::dt:
                if (trees.empty()) {
                    rep.dt_settings = std::get<learn::DecisionTreeModel>(locals[i].model).hyper;
                    rep.dt_donor = locals[i].meta.client_id;
                }
                trees.push_back(&std::get<learn::DecisionTreeModel>(locals[i].model));
                break;
            case learn::ModelKind::nb: ++rep.nb_locals; break;
        }
    }
    rep.svm_locals = svm_idx.size();
    rep.dt_locals = trees.size();

    // Step 7.
    if (donor) {
        gh.kernel = donor->hyper.kernel;
        gh.gamma = donor->hyper.gamma;
        gh.encoding = donor->hyper.encoding;
    } else {
        rep.notes.push_back("no SVM local model; the global SVM uses the default kernel and gamma");
    }
    rep.kernel = gh.kernel;
    rep.gamma = gh.gamma;

    // Steps 5 and 6.
    if (!trees.empty()) {
        std::vector<double> mean(trees.front()->feature_importances.size(), 0.0);
        for (const auto* t : trees) {
            if (t->feature_importances.size() != mean.size()) {
                throw Error(ErrorCode::heterogeneous_models, "aggregate: tree importances differ in length");
            }
            for (std::size_t f = 0; f < mean.size(); ++f) mean[f] += t->feature_importances[f];
        }
        for (double& v : mean) v /= static_cast<double>(trees.size());
        // Single-leaf trees carry all-zero importances; renormalize the rest.
        const double sum = std::accumulate(mean.begin(), mean.end(), 0.0);
        if (sum > 0.0) {
            for (double& v : mean) v /= sum;
        } else {
            rep.notes.push_back("every decision tree is a single leaf; mean importances are all zero");
        }
        g.mean_feature_importances = std::move(mean);
        rep.notes.push_back("decision-tree importances are attached as diagnostics and do not affect predictions");
    }
    if (rep.nb_locals > 0) {
        rep.notes.push_back("naive Bayes locals contribute no parameters; their shards still join the global dataset");
    }

    // Step 8.
    Dataset global_data;
    global_data.schema = shards.front().schema;
    std::vector<std::size_t> offsets;
    for (const auto& s : shards) {
        offsets.push_back(global_data.records.size());
        global_data.records.insert(global_data.records.end(), s.records.begin(), s.records.end());
    }
    global_data.provenance = "concat(" + std::to_string(shards.size()) + " shards)";
    rep.global_dataset_size = global_data.size();
    const learn::Samples samples = learn::to_samples(global_data);

    // Steps 3 and 4: concatenated expansion with duals scaled by 1/k, which
    // is the mean of the local decision functions.
    learn::LinearSvmModel warm;
    std::vector<double> init_alpha;
    if (donor) {
        const double k = static_cast<double>(svm_idx.size());
        warm.w.assign(donor->w.size(), 0.0);
        init_alpha.assign(samples.size(), 0.0);
        for (std::size_t i : svm_idx) {
            const auto& m = std::get<learn::LinearSvmModel>(locals[i].model);
            for (std::size_t f = 0; f < warm.w.size(); ++f) warm.w[f] += m.w[f];
            warm.b += m.b;
            const bool aligned = m.train_size == shards[i].size() && m.support_indices.size() == m.dual_coefs.size();
            if (!m.has_expansion() || !aligned) {
                rep.notes.push_back(client_prefix(locals[i].meta.client_id) +
                                    "SVM carries no usable support vectors; warm start uses (w, b) only");
            }
            for (std::size_t s = 0; s < m.dual_coefs.size(); ++s) {
                warm.support_vectors.push_back(m.support_vectors[s]);
                warm.dual_coefs.push_back(m.dual_coefs[s] / k);
                if (aligned) {
                    const std::size_t row = offsets[i] + m.support_indices[s];
                    warm.support_indices.push_back(row);
                    init_alpha[row] += std::abs(m.dual_coefs[s]) / k;
                }
            }
        }
        for (double& v : warm.w) v /= k;
        warm.b /= k;
        if (warm.support_indices.size() != warm.dual_coefs.size()) warm.support_indices.clear();
        warm.train_size = samples.size();
        warm.cardinality = donor->cardinality;
        warm.hyper = gh;
        rep.concatenated_support_vectors = warm.support_vectors.size();
    }

    // Step 9.
    if (gh.epochs == 0 && donor) {
        g.svm = std::move(warm);
        rep.retrain_epochs = 0;
    } else {
        learn::SvmFitOptions opts;
        opts.initial_alpha = std::move(init_alpha);
        auto fit = learn::fit_svm(samples, gh, opts);
        g.svm = std::move(fit.model);
        rep.retrain_epochs = fit.epochs_run;
    }

    g.provenance.mode = AggregationMode::paper13;
    g.provenance.round_count = 1;
    for (const auto& l : locals) g.provenance.client_ids.push_back(l.meta.client_id);
    g.provenance.total_examples = samples.size();
    return out;
}

FedAvgClient::FedAvgClient(std::uint32_t client_id, Dataset shard, FedAvgHyper hyper)
    : id_(client_id), shard_(std::move(shard)), hyper_(std::move(hyper)) {
    if (!(hyper_.prox_mu > 0.0) || !std::isfinite(hyper_.prox_mu)) {
        throw Error(ErrorCode::invalid_config, "fedavg: proximal weight must be positive");
    }
    samples_ = learn::to_samples(shard_);
}

learn::LocalModel FedAvgClient::update(const GlobalModel& global) {
    try {
        learn::SvmHyper h = hyper_.svm;
        h.seed = derive_seed(hyper_.svm.seed, rounds_);
        learn::SvmFitOptions opts;
        opts.initial_alpha = alpha_;
        if (global.trained()) opts.prior = learn::SvmPrior{global.svm.w, global.svm.b, hyper_.prox_mu};
        auto fit = learn::fit_svm(samples_, h, opts);
        alpha_ = std::move(fit.alpha);
        ++rounds_;

        learn::LocalModel m;
        auto& svm = fit.model;
        svm.hyper = hyper_.svm;
        svm.support_vectors.clear();
        svm.dual_coefs.clear();
        svm.support_indices.clear();
        m.meta.client_id = id_;
        m.meta.train_size = samples_.size();
        m.meta.train_accuracy = learn::accuracy(svm, samples_);
        m.model = std::move(svm);
        return m;
    } catch (const Error& e) {
        throw e.with_context(client_prefix(id_));
    }
}

metrics::ConfusionMatrix FedAvgClient::evaluate(const GlobalModel& global) const { return confusion_on(global, shard_); }

GlobalModel initial_global(const learn::SvmHyper& hyper) {
    GlobalModel g;
    g.svm.cardinality = feature_cardinality();
    g.svm.w.assign(learn::encoded_dim(g.svm.cardinality, kFeatureCount, hyper.encoding), 0.0);
    g.svm.hyper = hyper;
    g.provenance.mode = AggregationMode::fedavg;
    return g;
}

GlobalModel fedavg_average(const std::vector<learn::LocalModel>& updates, std::size_t round) {
    if (updates.empty()) throw Error(ErrorCode::invalid_input, "fedavg: no client updates");
    const learn::LinearSvmModel* first = nullptr;
    std::size_t total = 0;
    for (const auto& u : updates) {
        const auto* m = std::get_if<learn::LinearSvmModel>(&u.model);
        if (!m) {
            throw Error(ErrorCode::heterogeneous_models,
                        client_prefix(u.meta.client_id) + "fedavg needs linear SVM updates, got " +
                            learn::to_string(u.kind()));
        }
        if (!first) {
            first = m;
        } else if (m->w.size() != first->w.size() || m->hyper.encoding != first->hyper.encoding) {
            throw Error(ErrorCode::heterogeneous_models, "fedavg: client updates differ in input encoding");
        }
        total += u.meta.train_size;
    }
    if (total == 0) throw Error(ErrorCode::empty_shards, "fedavg: clients report no training rows");

    GlobalModel g;
    g.svm.w.assign(first->w.size(), 0.0);
    for (const auto& u : updates) {
        const auto& m = std::get<learn::LinearSvmModel>(u.model);
        const double p = static_cast<double>(u.meta.train_size) / static_cast<double>(total);
        for (std::size_t f = 0; f < m.w.size(); ++f) g.svm.w[f] += p * m.w[f];
        g.svm.b += p * m.b;
        g.provenance.client_ids.push_back(u.meta.client_id);
    }
    g.svm.train_size = total;
    g.svm.cardinality = first->cardinality;
    g.svm.hyper = first->hyper;
    g.provenance.mode = AggregationMode::fedavg;
    g.provenance.round_count = round;
    g.provenance.total_examples = total;
    return g;
}

FedAvgResult fedavg_rounds(const std::vector<ClientShard>& clients, const Dataset& val, std::size_t rounds,
                           const FedAvgHyper& hyper) {
    if (rounds == 0) throw Error(ErrorCode::invalid_config, "fedavg: rounds must be at least 1");
    if (clients.empty()) throw Error(ErrorCode::empty_shards, "fedavg: no clients");
    std::vector<FedAvgClient> parties;
    for (const auto& c : clients) {
        FedAvgHyper h = hyper;
        h.svm.seed = derive_seed(hyper.svm.seed, c.client_id);
        parties.emplace_back(c.client_id, c.shard, h);
    }

    FedAvgResult out;
    out.global = initial_global(hyper.svm);
    for (std::size_t r = 1; r <= rounds; ++r) {
        std::vector<learn::LocalModel> updates;
        for (auto& p : parties) updates.push_back(p.update(out.global));
        out.global = fedavg_average(updates, r);
        metrics::ConfusionMatrix train;
        for (const auto& p : parties) train += p.evaluate(out.global);
        const auto tr = metrics::report(train, metrics::SplitTag::train);
        const auto va = evaluate_global(out.global, val);
        out.log.append({r, tr.accuracy_pct, va.accuracy_pct});
        out.history.push_back(out.global);
    }
    return out;
}

}  // namespace fedscreen::fed
