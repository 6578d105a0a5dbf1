#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fedscreen {

enum class ErrorCode {
    // ingest
    file_not_found,
    header_mismatch,
    empty_dataset,
    all_rows_dropped,
    degenerate_split,
    too_few_records,
    // preprocess
    invalid_range,
    non_finite_value,
    negative_age,
    missing_value,
    // synthgen
    invalid_config,
    // learners
    not_a_distribution,
    negative_alpha,
    single_class_dataset,
    invalid_input,
    // federation
    empty_shards,
    heterogeneous_models,
    frame_too_large,
    malformed_payload,
    unknown_type,
    version_mismatch,
    channel_closed,
    protocol_violation,
    privacy_violation,
    // metrics
    length_mismatch,
    empty_input,
    io_failure,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. Carries a machine-checkable code plus an optional
/// pipeline stage tag that the CLI prints on failure.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& stage() const noexcept { return stage_; }

    Error with_stage(std::string stage) const {
        Error e = *this;
        e.stage_ = std::move(stage);
        return e;
    }

    // Prefixes the message, e.g. "client 2: ".
    Error with_context(const std::string& prefix) const {
        Error e(code_, prefix + what());
        e.stage_ = stage_;
        return e;
    }

private:
    ErrorCode code_;
    std::string stage_;
};

}  // namespace fedscreen
