#include "fedscreen/error.hpp"

namespace fedscreen {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::file_not_found: return "FileNotFound";
        case ErrorCode::header_mismatch: return "HeaderMismatch";
        case ErrorCode::empty_dataset: return "EmptyDataset";
        case ErrorCode::all_rows_dropped: return "AllRowsDropped";
        case ErrorCode::degenerate_split: return "DegenerateSplit";
        case ErrorCode::too_few_records: return "TooFewRecords";
        case ErrorCode::invalid_range: return "InvalidRange";
        case ErrorCode::non_finite_value: return "NonFiniteValue";
        case ErrorCode::negative_age: return "NegativeAge";
        case ErrorCode::missing_value: return "MissingValue";
        case ErrorCode::invalid_config: return "InvalidConfig";
        case ErrorCode::not_a_distribution: return "NotADistribution";
        case ErrorCode::negative_alpha: return "NegativeAlpha";
        case ErrorCode::single_class_dataset: return "SingleClassDataset";
        case ErrorCode::invalid_input: return "InvalidInput";
        case ErrorCode::empty_shards: return "EmptyShards";
        case ErrorCode::heterogeneous_models: return "HeterogeneousModels";
        case ErrorCode::frame_too_large: return "FrameTooLarge";
        case ErrorCode::malformed_payload: return "MalformedPayload";
        case ErrorCode::unknown_type: return "UnknownType";
        case ErrorCode::version_mismatch: return "VersionMismatch";
        case ErrorCode::channel_closed: return "ChannelClosed";
        case ErrorCode::protocol_violation: return "ProtocolViolation";
        case ErrorCode::privacy_violation: return "PrivacyViolation";
        case ErrorCode::length_mismatch: return "LengthMismatch";
        case ErrorCode::empty_input: return "Empty";
        case ErrorCode::io_failure: return "IoFailure";
    }
    return "Unknown";
}

}  // namespace fedscreen
