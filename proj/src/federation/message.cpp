#include "fedscreen/federation/message.hpp"

#include "fedscreen/error.hpp"
#include "fedscreen/learners/model_io.hpp"

namespace fedscreen::fed {

using nlohmann::json;

namespace {

constexpr std::string_view kTypeNames[kMessageTypeCount] = {"register",     "local_model", "shard",
                                                            "global_model", "eval_result", "shutdown"};

Error malformed(const std::string& what) { return Error(ErrorCode::malformed_payload, "message: " + what); }

json to_json(const metrics::ConfusionMatrix& cm) {
    return {{"tp", cm.tp}, {"fp", cm.fp}, {"tn", cm.tn}, {"fn", cm.fn}};
}

metrics::ConfusionMatrix confusion_from_json(const json& j) {
    metrics::ConfusionMatrix cm;
    cm.tp = j.at("tp").get<std::size_t>();
    cm.fp = j.at("fp").get<std::size_t>();
    cm.tn = j.at("tn").get<std::size_t>();
    cm.fn = j.at("fn").get<std::size_t>();
    return cm;
}

json schema_to_json(const FeatureSchema& s) {
    json feats = json::array();
    for (const auto& f : s.features()) {
        feats.push_back({{"name", f.name},
                         {"unit", f.unit},
                         {"male", {f.male.lower, f.male.upper}},
                         {"female", {f.female.lower, f.female.upper}}});
    }
    return {{"class_name", s.class_name()}, {"features", feats}};
}

FeatureSchema schema_from_json(const json& j) {
    std::vector<FeatureDef> defs;
    for (const auto& f : j.at("features")) {
        FeatureDef d;
        d.name = f.at("name").get<std::string>();
        d.unit = f.at("unit").get<std::string>();
        d.male = {f.at("male").at(0).get<double>(), f.at("male").at(1).get<double>()};
        d.female = {f.at("female").at(0).get<double>(), f.at("female").at(1).get<double>()};
        defs.push_back(std::move(d));
    }
    try {
        return FeatureSchema(std::move(defs), j.at("class_name").get<std::string>());
    } catch (const Error& e) {
        throw malformed(std::string("schema: ") + e.what());
    }
}

}  // namespace

std::string_view message_type_name(std::size_t index) { return kTypeNames[index]; }

std::string_view message_type(const Message& m) { return kTypeNames[m.index()]; }

json to_json(const Dataset& d) {
    // Rows are compact arrays: 9 bins, gender, age, label.
    json rows = json::array();
    for (const auto& r : d.records) {
        json row = json::array();
        for (auto b : r.bins) row.push_back(b);
        row.push_back(r.gender_bin);
        row.push_back(r.age_bin);
        row.push_back(r.label);
        rows.push_back(std::move(row));
    }
    return {{"schema", schema_to_json(d.schema)}, {"provenance", d.provenance}, {"rows", rows}};
}

Dataset dataset_from_json(const json& j) {
    Dataset d;
    d.schema = schema_from_json(j.at("schema"));
    d.provenance = j.at("provenance").get<std::string>();
    for (const auto& row : j.at("rows")) {
        if (!row.is_array() || row.size() != kFeatureCount + 1) throw malformed("dataset row has wrong length");
        auto cell = [&](std::size_t i) {
            const int v = row.at(i).get<int>();
            if (v < 0 || v > 255) throw malformed("dataset cell out of range");
            return static_cast<std::uint8_t>(v);
        };
        BinnedRecord r;
        for (std::size_t f = 0; f < kCbcCount; ++f) r.bins[f] = cell(f);
        r.gender_bin = cell(kGenderIndex);
        r.age_bin = cell(kAgeIndex);
        r.label = cell(kFeatureCount);
        if (!r.valid()) throw malformed("dataset row out of range");
        d.records.push_back(r);
    }
    return d;
}

std::string encode_payload(const Message& m) {
    json j = std::visit(
        [](const auto& msg) -> json {
            using T = std::decay_t<decltype(msg)>;
            if constexpr (std::is_same_v<T, Register>) {
                return {{"client_id", msg.client_id}};
            } else if constexpr (std::is_same_v<T, LocalModelMsg>) {
                return {{"client_id", msg.client_id}, {"model", io::to_json(msg.model)}};
            } else if constexpr (std::is_same_v<T, ShardMsg>) {
                return {{"client_id", msg.client_id}, {"shard", to_json(msg.shard)}};
            } else if constexpr (std::is_same_v<T, GlobalModelMsg>) {
                return {{"round", msg.round}, {"request_update", msg.request_update}, {"model", fed::to_json(msg.model)}};
            } else if constexpr (std::is_same_v<T, EvalResult>) {
                return {{"client_id", msg.client_id}, {"metrics", to_json(msg.metrics)}};
            } else {
                return json::object();
            }
        },
        m);
    j["type"] = message_type(m);
    j["version"] = kProtocolVersion;
    return j.dump();
}

Message decode_payload(std::string_view payload) {
    json j;
    try {
        j = json::parse(payload);
    } catch (const json::exception& e) {
        throw malformed(e.what());
    }
    if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) throw malformed("missing type");
    if (!j.contains("version") || j.at("version") != kProtocolVersion) {
        throw Error(ErrorCode::version_mismatch,
                    "message: protocol version must be " + std::to_string(kProtocolVersion));
    }
    const std::string type = j.at("type").get<std::string>();
    try {
        if (type == "register") return Register{j.at("client_id").get<std::uint32_t>()};
        if (type == "local_model") {
            return LocalModelMsg{j.at("client_id").get<std::uint32_t>(), io::local_model_from_json(j.at("model"))};
        }
        if (type == "shard") return ShardMsg{j.at("client_id").get<std::uint32_t>(), dataset_from_json(j.at("shard"))};
        if (type == "global_model") {
            return GlobalModelMsg{j.at("round").get<std::size_t>(), global_model_from_json(j.at("model")),
                                  j.at("request_update").get<bool>()};
        }
        if (type == "eval_result") {
            return EvalResult{j.at("client_id").get<std::uint32_t>(), confusion_from_json(j.at("metrics"))};
        }
        if (type == "shutdown") return Shutdown{};
    } catch (const json::exception& e) {
        throw malformed(e.what());
    }
    throw Error(ErrorCode::unknown_type, "message: unknown type '" + type + "'");
}

std::vector<std::uint8_t> serialize_message(const Message& m) {
    const std::string payload = encode_payload(m);
    if (payload.size() > kMaxPayloadBytes) {
        throw Error(ErrorCode::frame_too_large, "message: payload of " + std::to_string(payload.size()) +
                                                    " bytes exceeds the 64 MiB limit");
    }
    const auto n = static_cast<std::uint32_t>(payload.size());
    std::vector<std::uint8_t> frame;
    frame.reserve(kFrameHeaderBytes + payload.size());
    frame.push_back(static_cast<std::uint8_t>(n >> 24));
    frame.push_back(static_cast<std::uint8_t>(n >> 16));
    frame.push_back(static_cast<std::uint8_t>(n >> 8));
    frame.push_back(static_cast<std::uint8_t>(n));
    frame.insert(frame.end(), payload.begin(), payload.end());
    return frame;
}

std::uint32_t read_frame_length(std::span<const std::uint8_t, kFrameHeaderBytes> h) {
    return (std::uint32_t{h[0]} << 24) | (std::uint32_t{h[1]} << 16) | (std::uint32_t{h[2]} << 8) | std::uint32_t{h[3]};
}

Message deserialize_message(std::span<const std::uint8_t> frame) {
    if (frame.size() < kFrameHeaderBytes) throw malformed("truncated frame header");
    const std::uint32_t n = read_frame_length(frame.first<kFrameHeaderBytes>());
    if (n > kMaxPayloadBytes) throw Error(ErrorCode::frame_too_large, "message: frame exceeds the 64 MiB limit");
    const std::size_t have = frame.size() - kFrameHeaderBytes;
    if (have < n) throw malformed("truncated frame");
    if (have > n) throw malformed("trailing bytes after frame");
    const auto* p = reinterpret_cast<const char*>(frame.data() + kFrameHeaderBytes);
    return decode_payload(std::string_view(p, n));
}

}  // namespace fedscreen::fed
