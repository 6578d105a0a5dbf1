#include "fedscreen/federation/global_model.hpp"

#include "fedscreen/error.hpp"
#include "fedscreen/learners/model_io.hpp"
#include "fedscreen/learners/samples.hpp"

namespace fedscreen::fed {

using nlohmann::json;

std::string to_string(AggregationMode m) { return m == AggregationMode::paper13 ? "paper13" : "fedavg"; }

AggregationMode parse_aggregation_mode(const std::string& s) {
    if (s == "paper13") return AggregationMode::paper13;
    if (s == "fedavg") return AggregationMode::fedavg;
    throw Error(ErrorCode::invalid_config, "unknown mode '" + s + "' (expected paper13 or fedavg)");
}

json to_json(const GlobalModel& g) {
    json j;
    j["type"] = "global";
    j["version"] = io::kModelFileVersion;
    j["provenance"] = {{"mode", to_string(g.provenance.mode)},
                       {"round_count", g.provenance.round_count},
                       {"client_ids", g.provenance.client_ids},
                       {"total_examples", g.provenance.total_examples}};
    if (g.mean_feature_importances) {
        json imp = json::array();
        for (double v : *g.mean_feature_importances) imp.push_back(io::encode_double(v));
        j["mean_feature_importances"] = imp;
    } else {
        j["mean_feature_importances"] = nullptr;
    }
    j["svm"] = io::to_json(g.svm);
    return j;
}

GlobalModel global_model_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::malformed_payload, "global model: expected an object");
    if (!j.contains("version") || j.at("version") != io::kModelFileVersion) {
        throw Error(ErrorCode::version_mismatch, "global model version must be " + std::to_string(io::kModelFileVersion));
    }
    try {
        if (j.at("type") != "global") throw Error(ErrorCode::malformed_payload, "global model: wrong type");
        GlobalModel g;
        const auto& p = j.at("provenance");
        g.provenance.mode = parse_aggregation_mode(p.at("mode").get<std::string>());
        g.provenance.round_count = p.at("round_count").get<std::size_t>();
        g.provenance.client_ids = p.at("client_ids").get<std::vector<std::uint32_t>>();
        g.provenance.total_examples = p.at("total_examples").get<std::size_t>();
        const auto& imp = j.at("mean_feature_importances");
        if (!imp.is_null()) {
            std::vector<double> v;
            for (const auto& x : imp) v.push_back(io::decode_double(x));
            g.mean_feature_importances = std::move(v);
        }
        g.svm = io::svm_from_json(j.at("svm"));
        return g;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::malformed_payload, std::string("global model: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::invalid_config) throw Error(ErrorCode::malformed_payload, e.what());
        throw;
    }
}

std::string dump_global(const GlobalModel& g) { return to_json(g).dump(1) + "\n"; }

GlobalModel parse_global(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::malformed_payload, std::string("global model: ") + e.what());
    }
    return global_model_from_json(j);
}

void save_global(const std::filesystem::path& path, const GlobalModel& g) { io::write_file(path, dump_global(g)); }

GlobalModel load_global(const std::filesystem::path& path) { return parse_global(io::read_file(path)); }

metrics::ConfusionMatrix confusion_on(const GlobalModel& g, const Dataset& data) {
    std::vector<int> preds, labels;
    preds.reserve(data.size());
    labels.reserve(data.size());
    for (const auto& r : data.records) {
        preds.push_back(g.predict(learn::to_input(r)));
        labels.push_back(r.label);
    }
    return metrics::confusion(preds, labels);
}

metrics::EvalReport evaluate_global(const GlobalModel& g, const Dataset& test, metrics::SplitTag tag) {
    return metrics::report(confusion_on(g, test), tag);
}

}  // namespace fedscreen::fed
