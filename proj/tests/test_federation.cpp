#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <thread>

#include "fedscreen/error.hpp"
#include "fedscreen/federation/aggregate.hpp"
#include "fedscreen/federation/message.hpp"
#include "fedscreen/federation/simulation.hpp"
#include "fedscreen/federation/transport.hpp"
#include "fedscreen/ingest.hpp"
#include "support.hpp"

using namespace fedscreen;
using namespace fedscreen::fed;
using learn::ModelKind;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::invalid_input;
}

std::vector<std::uint8_t> frame_of(const std::string& payload) {
    std::vector<std::uint8_t> f(4 + payload.size());
    const auto n = static_cast<std::uint32_t>(payload.size());
    f[0] = static_cast<std::uint8_t>(n >> 24);
    f[1] = static_cast<std::uint8_t>(n >> 16);
    f[2] = static_cast<std::uint8_t>(n >> 8);
    f[3] = static_cast<std::uint8_t>(n);
    std::memcpy(f.data() + 4, payload.data(), payload.size());
    return f;
}

// An SVM whose expansion reproduces the given (w, b). Along each used axis u
// it places duals d2 at 2u and d1 at u with 2*d2 + d1 = w_u and d2 + d1 = s,
// where s is b on the first used axis and 0 elsewhere.
learn::LocalModel handmade_svm(std::uint32_t id, const std::vector<double>& w, double b) {
    learn::LinearSvmModel m;
    m.w = w;
    m.b = b;
    m.cardinality = feature_cardinality();
    bool first = true;
    for (std::size_t f = 0; f < w.size(); ++f) {
        if (w[f] == 0.0) continue;
        const double s = first ? b : 0.0;
        first = false;
        std::vector<double> two(w.size(), 0.0), one(w.size(), 0.0);
        two[f] = 2;
        one[f] = 1;
        m.support_vectors.push_back(two);
        m.dual_coefs.push_back(w[f] - s);
        m.support_vectors.push_back(one);
        m.dual_coefs.push_back(2 * s - w[f]);
    }
    learn::LocalModel l;
    l.model = m;
    l.meta.client_id = id;
    l.meta.train_size = 10;
    return l;
}

std::vector<Dataset> three_shards(std::uint64_t seed) {
    const auto all = testing::synthetic(seed, 900, 360);
    return ingest::partition_clients(all, 3, seed);
}

SimulationConfig small_config() {
    SimulationConfig cfg;
    cfg.gen.n_total = 900;
    cfg.gen.n_carrier = 360;
    cfg.seed = 7;
    return cfg;
}

}  // namespace

// ---------------------------------------------------------------- messages

TEST_CASE("every message variant round-trips") {
    const auto shards = three_shards(1);
    learn::LearnerHyper h;
    std::vector<Message> msgs;
    msgs.push_back(Register{3});
    for (auto kind : {ModelKind::dt, ModelKind::nb, ModelKind::svm}) {
        msgs.push_back(LocalModelMsg{2, client_train(2, shards[1], kind, h)});
    }
    msgs.push_back(ShardMsg{1, shards[0]});
    std::vector<learn::LocalModel> locals{client_train(1, shards[0], ModelKind::dt, h),
                                          client_train(2, shards[1], ModelKind::svm, h)};
    const auto g = aggregate_paper13(locals, {shards[0], shards[1]}, h.svm).global;
    msgs.push_back(GlobalModelMsg{1, g, false});
    msgs.push_back(GlobalModelMsg{4, initial_global(h.svm), true});
    msgs.push_back(EvalResult{2, {5, 6, 7, 8}});
    msgs.push_back(Shutdown{});
    for (const auto& m : msgs) {
        const auto frame = serialize_message(m);
        const auto back = deserialize_message(frame);
        CHECK(back == m);
        CHECK(serialize_message(back) == frame);
    }
}

TEST_CASE("local model messages predict like the originals") {
    for (auto kind : {ModelKind::dt, ModelKind::nb, ModelKind::svm}) {
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            const auto m = testing::generated_model(kind, seed);
            const auto back = std::get<LocalModelMsg>(deserialize_message(serialize_message(LocalModelMsg{1, m})));
            Rng rng(seed);
            for (int i = 0; i < 100; ++i) {
                const auto x = testing::random_input(rng);
                REQUIRE(back.model.predict(x) == m.predict(x));
            }
        }
    }
}

TEST_CASE("shutdown frame layout") {
    const auto frame = serialize_message(Shutdown{});
    REQUIRE(frame.size() > 4);
    const std::uint32_t n = read_frame_length(std::span<const std::uint8_t, 4>(frame.data(), 4));
    CHECK(n == frame.size() - 4);
    const std::string payload(frame.begin() + 4, frame.end());
    const auto j = nlohmann::json::parse(payload);
    CHECK(j["type"] == "shutdown");
    CHECK(j["version"] == kProtocolVersion);
    CHECK(message_type(Shutdown{}) == "shutdown");
    CHECK(message_type_name(2) == "shard");
}

TEST_CASE("framing errors") {
    auto frame = serialize_message(Register{1});
    auto cut = frame;
    cut.pop_back();
    CHECK(code_of([&] { deserialize_message(cut); }) == ErrorCode::malformed_payload);
    CHECK(code_of([&] { deserialize_message(std::vector<std::uint8_t>{0, 0}); }) == ErrorCode::malformed_payload);
    auto extra = frame;
    extra.push_back('x');
    CHECK(code_of([&] { deserialize_message(extra); }) == ErrorCode::malformed_payload);
    CHECK(code_of([] { deserialize_message(frame_of(R"({"type":"gossip","version":1})")); }) ==
          ErrorCode::unknown_type);
    CHECK(code_of([] { deserialize_message(frame_of(R"({"type":"shutdown","version":2})")); }) ==
          ErrorCode::version_mismatch);
    CHECK(code_of([] { deserialize_message(frame_of("not json")); }) == ErrorCode::malformed_payload);
    CHECK(code_of([] { deserialize_message(frame_of(R"({"type":"register","version":1})")); }) ==
          ErrorCode::malformed_payload);
    CHECK(code_of([] {
              deserialize_message(frame_of(R"({"type":"eval_result","version":1,"client_id":1,"metrics":{"tp":-1}})"));
          }) == ErrorCode::malformed_payload);
}

// ---------------------------------------------------------------- transports

TEST_CASE("in-process endpoints exchange messages") {
    auto [a, b] = make_inproc_pair();
    auto counter = std::make_shared<TrafficCounter>();
    Endpoint ea(std::move(a), ShardPolicy::allow, counter);
    Endpoint eb(std::move(b), ShardPolicy::allow, counter);
    const auto shard = testing::synthetic(2, 60, 20);
    ea.send(Register{9});
    ea.send(ShardMsg{9, shard});
    eb.send(EvalResult{9, {1, 2, 3, 4}});
    CHECK(std::get<Register>(eb.receive()).client_id == 9);
    CHECK(std::get<ShardMsg>(eb.receive()).shard == shard);
    CHECK(std::get<EvalResult>(ea.receive()).metrics.tn == 3);
    CHECK(counter->shards() == 1);
    CHECK(counter->count(0) == 1);
    ea.close();
    CHECK(code_of([&] { eb.receive(); }) == ErrorCode::channel_closed);
}

TEST_CASE("truncated and oversized frames on the wire") {
    {
        auto [a, b] = make_inproc_pair();
        auto frame = serialize_message(Register{1});
        frame.resize(frame.size() - 3);
        a->write_all(frame);
        a->close();
        Endpoint eb(std::move(b), ShardPolicy::allow);
        CHECK(code_of([&] { eb.receive(); }) == ErrorCode::malformed_payload);
    }
    {
        auto [a, b] = make_inproc_pair();
        const std::vector<std::uint8_t> header{0x04, 0x00, 0x00, 0x01};  // 64 MiB + 1
        a->write_all(header);
        Endpoint eb(std::move(b), ShardPolicy::allow);
        CHECK(code_of([&] { eb.receive(); }) == ErrorCode::frame_too_large);
        // the endpoint closed the connection, so the peer sees the end of stream
        std::uint8_t byte;
        CHECK(a->read_some({&byte, 1}) == 0);
    }
}

TEST_CASE("forbidden shard messages never reach the wire") {
    auto [a, b] = make_inproc_pair();
    auto counter = std::make_shared<TrafficCounter>();
    Endpoint ea(std::move(a), ShardPolicy::forbid, counter);
    CHECK(code_of([&] { ea.send(ShardMsg{1, testing::synthetic(3, 30, 10)}); }) == ErrorCode::privacy_violation);
    CHECK(counter->shards() == 0);

    auto [c, d] = make_inproc_pair();
    Endpoint ec(std::move(c), ShardPolicy::allow);
    Endpoint ed(std::move(d), ShardPolicy::forbid);
    ec.send(ShardMsg{1, testing::synthetic(3, 30, 10)});
    CHECK(code_of([&] { ed.receive(); }) == ErrorCode::privacy_violation);
}

TEST_CASE("tcp endpoints on loopback") {
    TcpListener listener(0);
    REQUIRE(listener.port() != 0);
    const auto shard = testing::synthetic(4, 120, 40);
    std::thread client([port = listener.port(), &shard] {
        Endpoint e(tcp_connect("127.0.0.1", port), ShardPolicy::allow);
        e.send(Register{5});
        e.send(ShardMsg{5, shard});
        const auto reply = e.receive();
        CHECK(std::holds_alternative<Shutdown>(reply));
        e.close();
    });
    auto conn = listener.accept(std::chrono::seconds(10));
    REQUIRE(conn);
    Endpoint server(std::move(conn), ShardPolicy::allow);
    CHECK(std::get<Register>(server.receive()).client_id == 5);
    CHECK(std::get<ShardMsg>(server.receive()).shard == shard);
    server.send(Shutdown{});
    client.join();
    CHECK(code_of([&] { server.receive(); }) == ErrorCode::channel_closed);
}

TEST_CASE("accept times out without a client") {
    TcpListener listener(0);
    CHECK(code_of([&] { listener.accept(std::chrono::milliseconds(50)); }) == ErrorCode::channel_closed);
}

// ---------------------------------------------------------------- paper13

TEST_CASE("warm start is the mean of two handmade SVMs") {
    std::vector<double> w1(kFeatureCount, 0.0), w2(kFeatureCount, 0.0);
    w1[0] = 1;
    w2[1] = 1;
    const auto a = handmade_svm(1, w1, 0.0);
    const auto b = handmade_svm(2, w2, 2.0);
    for (const auto* l : {&a, &b}) {
        const auto& m = std::get<learn::LinearSvmModel>(l->model);
        Rng rng(1);
        for (int i = 0; i < 20; ++i) {
            const auto x = testing::random_input(rng);
            REQUIRE(m.decision_from_duals(x) == doctest::Approx(m.decision(x)).epsilon(1e-12));
        }
    }
    learn::SvmHyper h;
    h.epochs = 0;
    const auto shard = testing::synthetic(5, 20, 10);
    const auto res = aggregate_paper13({a, b}, {shard, shard}, h);
    const auto& g = res.global.svm;
    CHECK(g.w[0] == 0.5);
    CHECK(g.w[1] == 0.5);
    for (std::size_t f = 2; f < g.w.size(); ++f) CHECK(g.w[f] == 0.0);
    CHECK(g.b == 1.0);
    CHECK(res.report.svm_locals == 2);
    CHECK(res.report.concatenated_support_vectors == 4);
    CHECK(res.report.global_dataset_size == 40);
    CHECK(res.report.retrain_epochs == 0);
    CHECK(res.global.provenance.client_ids == std::vector<std::uint32_t>{1, 2});
    CHECK(!res.global.mean_feature_importances);
}

TEST_CASE("warm start decision equals the mean of local decisions") {
    const auto shards = three_shards(2);
    learn::LearnerHyper h;
    std::vector<learn::LocalModel> locals;
    for (std::uint32_t i = 0; i < 3; ++i) {
        h.svm.seed = 100 + i;
        locals.push_back(client_train(i + 1, shards[i], ModelKind::svm, h));
    }
    learn::SvmHyper gh;
    gh.epochs = 0;
    const auto res = aggregate_paper13(locals, shards, gh);
    const auto& g = res.global.svm;
    Rng rng(4);
    for (int t = 0; t < 500; ++t) {
        const auto x = testing::random_input(rng);
        double mean = 0;
        for (const auto& l : locals) mean += std::get<learn::LinearSvmModel>(l.model).decision(x);
        mean /= 3;
        CHECK(std::abs(g.decision(x) - mean) <= 1e-9);
        CHECK(std::abs(g.decision_from_duals(x) - mean) <= 1e-9);
    }
    std::size_t svs = 0;
    for (const auto& l : locals) svs += std::get<learn::LinearSvmModel>(l.model).dual_coefs.size();
    CHECK(res.report.concatenated_support_vectors == svs);
    CHECK(res.report.global_dataset_size == shards[0].size() + shards[1].size() + shards[2].size());
}

TEST_CASE("identical shards: the global predicts like a single local") {
    const auto shard = testing::synthetic(3, 400, 160);
    const auto val = testing::synthetic(30, 400, 160);
    learn::LearnerHyper h;
    h.svm.epochs = 2000;
    h.svm.tolerance = 1e-12;
    std::vector<learn::LocalModel> locals;
    for (std::uint32_t i = 1; i <= 3; ++i) {
        h.svm.seed = i;
        locals.push_back(client_train(i, shard, ModelKind::svm, h));
    }
    auto gh = h.svm;
    gh.seed = 99;
    const auto g = aggregate_paper13(locals, {shard, shard, shard}, gh).global;
    int mismatches = 0;
    for (const auto& r : val.records) mismatches += g.predict(learn::to_input(r)) != locals[0].predict(learn::to_input(r));
    CHECK(mismatches == 0);
}

TEST_CASE("tree importances and notes") {
    const auto shards = three_shards(6);
    learn::LearnerHyper h;
    const auto dt = client_train(1, shards[0], ModelKind::dt, h);
    const auto nb = client_train(2, shards[1], ModelKind::nb, h);
    const auto res = aggregate_paper13({dt, nb}, {shards[0], shards[1]}, h.svm);
    REQUIRE(res.global.mean_feature_importances);
    const auto& own = std::get<learn::DecisionTreeModel>(dt.model).feature_importances;
    REQUIRE(res.global.mean_feature_importances->size() == own.size());
    for (std::size_t f = 0; f < own.size(); ++f) {
        CHECK((*res.global.mean_feature_importances)[f] == doctest::Approx(own[f]).epsilon(1e-12));
    }
    CHECK(res.report.svm_locals == 0);
    CHECK(res.report.dt_donor == 1u);
    CHECK(res.report.dt_settings == h.dt);
    CHECK(res.report.nb_locals == 1);
    CHECK(res.report.notes.size() >= 3);
    CHECK(res.global.trained());
    CHECK(res.report.kernel == "linear");

    auto dt2 = client_train(3, shards[2], ModelKind::dt, h);
    const auto both = aggregate_paper13({dt, dt2}, {shards[0], shards[2]}, h.svm);
    double sum = 0;
    for (double v : *both.global.mean_feature_importances) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("aggregation errors") {
    const auto shards = three_shards(7);
    learn::LearnerHyper h;
    const auto svm = client_train(1, shards[0], ModelKind::svm, h);
    h.svm.encoding = learn::SvmEncoding::one_hot;
    const auto hot = client_train(2, shards[1], ModelKind::svm, h);
    CHECK(code_of([&] { aggregate_paper13({svm, hot}, {shards[0], shards[1]}, h.svm); }) ==
          ErrorCode::heterogeneous_models);
    CHECK(code_of([&] { aggregate_paper13({}, {}, h.svm); }) == ErrorCode::invalid_input);
    CHECK(code_of([&] { aggregate_paper13({svm}, {Dataset{}}, h.svm); }) == ErrorCode::empty_shards);
    CHECK(code_of([&] { aggregate_paper13({svm}, {}, h.svm); }) == ErrorCode::invalid_input);
}

TEST_CASE("client errors name the client") {
    Dataset one = testing::synthetic(8, 60, 20);
    std::erase_if(one.records, [](const BinnedRecord& r) { return r.label == 1; });
    try {
        client_train(2, one, ModelKind::svm, {});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::single_class_dataset);
        CHECK(std::string(e.what()).rfind("client 2: ", 0) == 0);
    }
    const auto shard = testing::synthetic(9, 120, 40);
    CHECK(client_train(1, shard, ModelKind::svm, {}) == client_train(1, shard, ModelKind::svm, {}));
}

// ---------------------------------------------------------------- fedavg

namespace {

FedAvgHyper tight_fedavg() {
    FedAvgHyper h;
    h.svm.epochs = 3000;
    h.svm.tolerance = 1e-13;
    return h;
}

double max_change(const GlobalModel& a, const GlobalModel& b) {
    double d = std::abs(a.svm.b - b.svm.b);
    for (std::size_t f = 0; f < a.svm.w.size(); ++f) d = std::max(d, std::abs(a.svm.w[f] - b.svm.w[f]));
    return d;
}

}  // namespace

TEST_CASE("fedavg with one client tracks that client") {
    const auto shard = testing::synthetic(10, 300, 120);
    const auto val = testing::synthetic(11, 200, 80);
    FedAvgHyper h;
    const auto res = fedavg_rounds({{1, shard}}, val, 3, h);
    FedAvgHyper ch = h;
    ch.svm.seed = derive_seed(h.svm.seed, 1);
    FedAvgClient solo(1, shard, ch);
    GlobalModel g = initial_global(h.svm);
    for (std::size_t r = 0; r < 3; ++r) {
        const auto u = solo.update(g);
        const auto& m = std::get<learn::LinearSvmModel>(u.model);
        CHECK(res.history[r].svm.w == m.w);
        CHECK(res.history[r].svm.b == m.b);
        g = res.history[r];
    }
    CHECK(res.log.size() == 3);
    CHECK(res.log.entries()[2].round_index == 3);
    CHECK(res.global.provenance.round_count == 3);
}

TEST_CASE("fedavg reaches a fixed point on identical clients") {
    const auto shard = testing::synthetic(12, 300, 120);
    const auto res = fedavg_rounds({{1, shard}, {2, shard}, {3, shard}}, shard, 3, tight_fedavg());
    CHECK(max_change(res.history[1], res.history[2]) < 1e-9);
}

TEST_CASE("fedavg weights clients by shard size") {
    std::vector<double> wa(kFeatureCount, 0.0), wb(kFeatureCount, 0.0);
    wa[0] = 3;
    wb[0] = 0;
    wb[1] = 3;
    auto a = handmade_svm(1, wa, 3.0);
    auto b = handmade_svm(2, wb, 0.0);
    a.meta.train_size = 200;
    b.meta.train_size = 100;
    const auto g = fedavg_average({a, b}, 1);
    CHECK(g.svm.w[0] == doctest::Approx(2.0));
    CHECK(g.svm.w[1] == doctest::Approx(1.0));
    CHECK(g.svm.b == doctest::Approx(2.0));
    CHECK(g.provenance.total_examples == 300);
    CHECK(!g.svm.has_expansion());

    const auto shard = testing::synthetic(13, 120, 40);
    const auto tree = client_train(3, shard, ModelKind::dt, {});
    CHECK(code_of([&] { fedavg_average({a, tree}, 1); }) == ErrorCode::heterogeneous_models);
}

TEST_CASE("fedavg client updates carry only (w, b)") {
    const auto shard = testing::synthetic(14, 200, 80);
    FedAvgClient c(4, shard, FedAvgHyper{});
    const auto u = c.update(initial_global({}));
    const auto& m = std::get<learn::LinearSvmModel>(u.model);
    CHECK(!m.has_expansion());
    CHECK(m.support_indices.empty());
    CHECK(u.meta.train_size == 200);
    FedAvgHyper bad;
    bad.prox_mu = 0;
    CHECK(code_of([&] { FedAvgClient(1, shard, bad); }) == ErrorCode::invalid_config);
    CHECK(code_of([&] { fedavg_rounds({{1, shard}}, shard, 0, {}); }) == ErrorCode::invalid_config);
}

// ---------------------------------------------------------------- simulation

TEST_CASE("paper13 simulation end to end") {
    auto cfg = small_config();
    const auto res = run_simulation(cfg);
    CHECK(res.global.trained());
    CHECK(res.train_size + res.val_size == 900);
    CHECK(res.val_size == 270);
    CHECK(res.validation.n == 270);
    CHECK(res.shard_sizes.size() == 3);
    CHECK(res.shard_messages == 3);
    REQUIRE(res.aggregation);
    CHECK(res.aggregation->global_dataset_size == res.train_size);
    REQUIRE(res.local_summaries.size() == 3);
    CHECK(res.local_summaries[0].kind == ModelKind::dt);
    CHECK(res.local_summaries[1].kind == ModelKind::nb);
    CHECK(res.local_summaries[2].kind == ModelKind::svm);
    CHECK(res.validation.accuracy_pct > 85.0);
    CHECK(res.global.provenance.client_ids == std::vector<std::uint32_t>{1, 2, 3});
    const auto again = run_simulation(cfg);
    CHECK(dump_global(again.global) == dump_global(res.global));
}

TEST_CASE("tcp and in-process runs agree") {
    for (auto mode : {AggregationMode::paper13, AggregationMode::fedavg}) {
        auto cfg = small_config();
        cfg.mode = mode;
        cfg.rounds = 3;
        if (mode == AggregationMode::fedavg) cfg.kinds = {ModelKind::svm};
        const auto a = run_simulation(cfg);
        cfg.transport = TransportKind::tcp;
        cfg.port = 0;
        const auto b = run_simulation(cfg);
        CHECK(dump_global(a.global) == dump_global(b.global));
        CHECK(a.log == b.log);
        CHECK(a.messages_sent == b.messages_sent);
    }
}

TEST_CASE("fedavg simulation never ships data") {
    auto cfg = small_config();
    cfg.mode = AggregationMode::fedavg;
    cfg.kinds = {ModelKind::svm};
    cfg.rounds = 4;
    const auto res = run_simulation(cfg);
    CHECK(res.shard_messages == 0);
    CHECK(res.log.size() == 4);
    CHECK(!res.aggregation);
    CHECK(res.global.provenance.round_count == 4);

    cfg.kinds = {ModelKind::svm, ModelKind::dt};
    CHECK(code_of([&] { run_simulation(cfg); }) == ErrorCode::heterogeneous_models);
}

TEST_CASE("simulation errors carry a stage") {
    auto cfg = small_config();
    cfg.input = "/nonexistent/data.csv";
    try {
        run_simulation(cfg);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::file_not_found);
        CHECK(e.stage() == "ingest");
    }
    cfg = small_config();
    cfg.clients = 0;
    try {
        run_simulation(cfg);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.stage() == "config");
    }
    cfg = small_config();
    cfg.hyper.svm.C = -1;
    try {
        run_simulation(cfg);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::invalid_config);
        CHECK((e.stage() == "train" || e.stage() == "config"));
    }
}
