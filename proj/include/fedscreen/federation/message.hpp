#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fedscreen/dataset.hpp"
#include "fedscreen/federation/global_model.hpp"
#include "fedscreen/learners/local_model.hpp"
#include "fedscreen/metrics.hpp"

namespace fedscreen::fed {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::size_t kMaxPayloadBytes = std::size_t{64} << 20;
inline constexpr std::size_t kFrameHeaderBytes = 4;

struct Register {
    std::uint32_t client_id = 0;
    bool operator==(const Register&) const = default;
};

struct LocalModelMsg {
    std::uint32_t client_id = 0;
    learn::LocalModel model;
    bool operator==(const LocalModelMsg&) const = default;
};

// Raw client data. Only the paper13 mode sends these.
struct ShardMsg {
    std::uint32_t client_id = 0;
    Dataset shard;
    bool operator==(const ShardMsg&) const = default;
};

struct GlobalModelMsg {
    std::size_t round = 0;
    GlobalModel model;
    // Set while a FedAvg round wants a fresh local update back.
    bool request_update = false;
    bool operator==(const GlobalModelMsg&) const = default;
};

// The global model evaluated on the client's own shard.
struct EvalResult {
    std::uint32_t client_id = 0;
    metrics::ConfusionMatrix metrics;
    bool operator==(const EvalResult&) const = default;
};

struct Shutdown {
    bool operator==(const Shutdown&) const = default;
};

using Message = std::variant<Register, LocalModelMsg, ShardMsg, GlobalModelMsg, EvalResult, Shutdown>;

inline constexpr std::size_t kMessageTypeCount = std::variant_size_v<Message>;

// "register", "local_model", "shard", "global_model", "eval_result", "shutdown"
std::string_view message_type(const Message& m);
std::string_view message_type_name(std::size_t index);

nlohmann::json to_json(const Dataset& d);
Dataset dataset_from_json(const nlohmann::json& j);

std::string encode_payload(const Message& m);
Message decode_payload(std::string_view payload);

// Frame: 4-byte big-endian payload length, then the UTF-8 JSON payload.
std::vector<std::uint8_t> serialize_message(const Message& m);
// Expects exactly one complete frame.
Message deserialize_message(std::span<const std::uint8_t> frame);

std::uint32_t read_frame_length(std::span<const std::uint8_t, kFrameHeaderBytes> header);

}  // namespace fedscreen::fed
