#include "fedscreen/federation/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <memory>
#include <thread>

#include "fedscreen/error.hpp"
#include "fedscreen/federation/transport.hpp"
#include "fedscreen/preprocess.hpp"
#include "fedscreen/rng.hpp"

namespace fedscreen::fed {

namespace {

constexpr auto kAcceptTimeout = std::chrono::seconds(30);

template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        if (!e.stage().empty()) throw;
        throw e.with_stage(stage);
    }
}

Error protocol_error(const std::string& what) { return Error(ErrorCode::protocol_violation, what); }

template <class T>
T expect(Endpoint& ep, const char* what) {
    Message m = ep.receive();
    if (auto* v = std::get_if<T>(&m)) return std::move(*v);
    throw protocol_error(std::string("expected ") + what + ", got " + std::string(message_type(m)));
}

struct ClientSetup {
    std::uint32_t id = 0;
    Dataset shard;
    learn::ModelKind kind = learn::ModelKind::svm;
    learn::LearnerHyper hyper;
    AggregationMode mode = AggregationMode::paper13;
    double prox_mu = 0.1;
};

void run_client(Endpoint& ep, const ClientSetup& s) {
    ep.send(Register{s.id});
    if (s.mode == AggregationMode::paper13) {
        ep.send(LocalModelMsg{s.id, client_train(s.id, s.shard, s.kind, s.hyper)});
        ep.send(ShardMsg{s.id, s.shard});
        for (;;) {
            Message m = ep.receive();
            if (std::holds_alternative<Shutdown>(m)) return;
            const auto* g = std::get_if<GlobalModelMsg>(&m);
            if (!g) throw protocol_error("client: unexpected " + std::string(message_type(m)));
            ep.send(EvalResult{s.id, confusion_on(g->model, s.shard)});
        }
    }
    FedAvgClient client(s.id, s.shard, FedAvgHyper{s.hyper.svm, s.prox_mu});
    for (;;) {
        Message m = ep.receive();
        if (std::holds_alternative<Shutdown>(m)) return;
        const auto* g = std::get_if<GlobalModelMsg>(&m);
        if (!g) throw protocol_error("client: unexpected " + std::string(message_type(m)));
        if (g->model.trained()) ep.send(EvalResult{s.id, client.evaluate(g->model)});
        if (g->request_update) ep.send(LocalModelMsg{s.id, client.update(g->model)});
    }
}

struct CoordinatorOutput {
    GlobalModel global;
    metrics::RoundLog log;
    metrics::ConfusionMatrix final_train;
    std::vector<learn::LocalModel> locals;
    std::optional<AggregationReport> aggregation;
};

metrics::ConfusionMatrix collect_evals(std::vector<Endpoint*>& eps, const std::vector<std::uint32_t>& ids) {
    metrics::ConfusionMatrix cm;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const auto r = expect<EvalResult>(*eps[i], "eval_result");
        if (r.client_id != ids[i]) throw protocol_error("eval_result from the wrong client");
        cm += r.metrics;
    }
    return cm;
}

learn::LocalModel collect_local(Endpoint& ep, std::uint32_t id) {
    auto msg = expect<LocalModelMsg>(ep, "local_model");
    if (msg.client_id != id || msg.model.meta.client_id != id) throw protocol_error("local_model from the wrong client");
    return std::move(msg.model);
}

// `eps` is in registration order (ascending client id).
CoordinatorOutput coordinate(std::vector<Endpoint*>& eps, const std::vector<std::uint32_t>& ids,
                             const SimulationConfig& cfg, const Dataset& val) {
    CoordinatorOutput out;
    if (cfg.mode == AggregationMode::paper13) {
        std::vector<Dataset> shards;
        for (std::size_t i = 0; i < eps.size(); ++i) {
            out.locals.push_back(collect_local(*eps[i], ids[i]));
            auto shard = expect<ShardMsg>(*eps[i], "shard");
            if (shard.client_id != ids[i]) throw protocol_error("shard from the wrong client");
            shards.push_back(std::move(shard.shard));
        }
        learn::SvmHyper gh = cfg.hyper.svm;
        gh.seed = derive_seed(cfg.seed, 2);
        auto agg = aggregate_paper13(out.locals, shards, gh);
        out.global = std::move(agg.global);
        out.aggregation = std::move(agg.report);
        for (auto* ep : eps) ep->send(GlobalModelMsg{1, out.global, false});
        out.final_train = collect_evals(eps, ids);
        const auto tr = metrics::report(out.final_train, metrics::SplitTag::train);
        out.log.append({1, tr.accuracy_pct, evaluate_global(out.global, val).accuracy_pct});
    } else {
        learn::SvmHyper gh = cfg.hyper.svm;
        out.global = initial_global(gh);
        double prev_val = 0.0;
        for (std::size_t r = 1; r <= cfg.rounds; ++r) {
            for (auto* ep : eps) ep->send(GlobalModelMsg{r, out.global, true});
            std::vector<learn::LocalModel> updates;
            metrics::ConfusionMatrix train;
            for (std::size_t i = 0; i < eps.size(); ++i) {
                if (out.global.trained()) {
                    const auto e = expect<EvalResult>(*eps[i], "eval_result");
                    if (e.client_id != ids[i]) throw protocol_error("eval_result from the wrong client");
                    train += e.metrics;
                }
                updates.push_back(collect_local(*eps[i], ids[i]));
            }
            if (out.global.trained()) {
                out.log.append({r - 1, metrics::report(train, metrics::SplitTag::train).accuracy_pct, prev_val});
            }
            out.global = fedavg_average(updates, r);
            out.global.svm.hyper = gh;
            prev_val = evaluate_global(out.global, val).accuracy_pct;
            out.locals = std::move(updates);
        }
        for (auto* ep : eps) ep->send(GlobalModelMsg{cfg.rounds, out.global, false});
        out.final_train = collect_evals(eps, ids);
        out.log.append({cfg.rounds, metrics::report(out.final_train, metrics::SplitTag::train).accuracy_pct, prev_val});
    }
    for (auto* ep : eps) ep->send(Shutdown{});
    return out;
}

CoordinatorOutput run_protocol(const SimulationConfig& cfg, const std::vector<Dataset>& shards, const Dataset& val,
                               std::shared_ptr<TrafficCounter> counter) {
    const std::size_t k = shards.size();
    const ShardPolicy policy = cfg.mode == AggregationMode::fedavg ? ShardPolicy::forbid : ShardPolicy::allow;

    std::vector<ClientSetup> setups(k);
    for (std::size_t i = 0; i < k; ++i) {
        auto& s = setups[i];
        s.id = static_cast<std::uint32_t>(i + 1);
        s.shard = shards[i];
        s.kind = cfg.kind_of(s.id);
        s.hyper = cfg.hyper;
        s.hyper.svm.seed = derive_seed(cfg.seed, 100 + s.id);
        s.mode = cfg.mode;
        s.prox_mu = cfg.prox_mu;
    }

    std::vector<std::unique_ptr<Endpoint>> coord;
    std::vector<std::optional<Error>> client_errors(k);
    std::vector<std::thread> threads;
    std::optional<TcpListener> listener;
    if (cfg.transport == TransportKind::tcp) listener.emplace(cfg.port);
    const std::uint16_t port = listener ? listener->port() : 0;

    auto client_body = [&](std::size_t i, std::unique_ptr<Connection> conn) {
        try {
            if (!conn) conn = tcp_connect("127.0.0.1", port);
            Endpoint ep(std::move(conn), policy, counter);
            run_client(ep, setups[i]);
        } catch (const Error& e) {
            client_errors[i] = e;
        } catch (const std::exception& e) {
            client_errors[i] = Error(ErrorCode::io_failure, e.what());
        }
    };

    for (std::size_t i = 0; i < k; ++i) {
        std::unique_ptr<Connection> client_end;
        if (cfg.transport == TransportKind::inproc) {
            auto [a, b] = make_inproc_pair();
            coord.push_back(std::make_unique<Endpoint>(std::move(a), policy, counter));
            client_end = std::move(b);
        }
        threads.emplace_back(client_body, i, std::move(client_end));
    }

    std::optional<CoordinatorOutput> out;
    std::exception_ptr failure;
    try {
        if (listener) {
            for (std::size_t i = 0; i < k; ++i) {
                coord.push_back(std::make_unique<Endpoint>(listener->accept(kAcceptTimeout), policy, counter));
            }
        }
        // Registration: order parties by client id regardless of arrival order.
        std::vector<std::pair<std::uint32_t, Endpoint*>> reg;
        for (auto& ep : coord) reg.emplace_back(expect<Register>(*ep, "register").client_id, ep.get());
        std::sort(reg.begin(), reg.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<Endpoint*> eps;
        std::vector<std::uint32_t> ids;
        for (std::size_t i = 0; i < reg.size(); ++i) {
            if (reg[i].first != setups[i].id) throw protocol_error("unexpected client registration");
            ids.push_back(reg[i].first);
            eps.push_back(reg[i].second);
        }
        out = coordinate(eps, ids, cfg, val);
    } catch (...) {
        failure = std::current_exception();
        for (auto& ep : coord) ep->close();
    }
    for (auto& t : threads) t.join();
    coord.clear();

    // A client's own failure explains the coordinator's; report it first.
    for (const auto& e : client_errors) {
        if (e && e->code() != ErrorCode::channel_closed) throw e->with_stage("train");
    }
    if (failure) std::rethrow_exception(failure);
    for (const auto& e : client_errors) {
        if (e) throw e->with_stage("federation");
    }
    return std::move(*out);
}

}  // namespace

std::string to_string(TransportKind t) { return t == TransportKind::inproc ? "inproc" : "tcp"; }

TransportKind parse_transport(const std::string& s) {
    if (s == "inproc") return TransportKind::inproc;
    if (s == "tcp") return TransportKind::tcp;
    throw Error(ErrorCode::invalid_config, "unknown transport '" + s + "' (expected inproc or tcp)");
}

void SimulationConfig::validate() const {
    if (clients == 0) throw Error(ErrorCode::invalid_config, "clients must be at least 1");
    if (kinds.empty()) throw Error(ErrorCode::invalid_config, "at least one model kind is required");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error(ErrorCode::invalid_config, "train fraction must lie in (0, 1)");
    }
    if (mode == AggregationMode::fedavg) {
        if (rounds == 0) throw Error(ErrorCode::invalid_config, "rounds must be at least 1");
        for (std::uint32_t id = 1; id <= clients; ++id) {
            if (kind_of(id) != learn::ModelKind::svm) {
                throw Error(ErrorCode::heterogeneous_models,
                            "fedavg averages linear SVMs; client " + std::to_string(id) + " would train " +
                                learn::to_string(kind_of(id)));
            }
        }
        if (!(prox_mu > 0.0)) throw Error(ErrorCode::invalid_config, "proximal weight must be positive");
    }
}

SimulationResult run_simulation(const SimulationConfig& cfg) {
    staged("config", [&] { cfg.validate(); });
    SimulationResult res;

    ingest::RawTable raw = staged("ingest", [&] {
        if (cfg.input) return ingest::load_raw_csv(*cfg.input, cfg.schema);
        synth::GenConfig gen = cfg.gen;
        gen.seed = cfg.seed;
        ingest::RawTable t;
        t.records = synth::generate(gen, cfg.schema);
        t.report.rows_read = t.records.size();
        t.report.rows_kept = t.records.size();
        return t;
    });
    const ingest::RawTable cleaned = staged("clean", [&] { return ingest::clean(raw, cfg.missing); });
    res.cleaning = cleaned.report;
    const Dataset data = staged("preprocess", [&] { return preprocess::normalize_dataset(cleaned.records, cfg.schema); });

    auto [train, val] = staged("split", [&] {
        ingest::SplitSpec spec;
        spec.train_fraction = cfg.train_fraction;
        spec.seed = cfg.seed;
        spec.client_count = cfg.clients;
        return ingest::train_val_split(data, spec);
    });
    const auto shards = staged("split", [&] { return ingest::partition_clients(train, cfg.clients, derive_seed(cfg.seed, 1)); });
    res.train_size = train.size();
    res.val_size = val.size();
    for (const auto& s : shards) res.shard_sizes.push_back(s.size());

    auto counter = std::make_shared<TrafficCounter>();
    auto out = staged("federation", [&] { return run_protocol(cfg, shards, val, counter); });

    staged("evaluate", [&] {
        res.global = std::move(out.global);
        res.log = std::move(out.log);
        res.training = metrics::report(out.final_train, metrics::SplitTag::train);
        res.validation = evaluate_global(res.global, val);
        res.aggregation = std::move(out.aggregation);
        res.locals = std::move(out.locals);
        for (const auto& l : res.locals) {
            LocalSummary s;
            s.client_id = l.meta.client_id;
            s.kind = l.kind();
            s.train_size = l.meta.train_size;
            s.train_accuracy_pct = 100.0 * l.meta.train_accuracy;
            std::vector<int> preds, labels;
            for (const auto& r : val.records) {
                preds.push_back(l.predict(learn::to_input(r)));
                labels.push_back(r.label);
            }
            s.validation = metrics::report(metrics::confusion(preds, labels), metrics::SplitTag::validation);
            res.local_summaries.push_back(std::move(s));
        }
    });
    for (std::size_t i = 0; i < kMessageTypeCount; ++i) res.messages_sent[i] = counter->count(i);
    res.shard_messages = counter->shards();
    return res;
}

}  // namespace fedscreen::fed
