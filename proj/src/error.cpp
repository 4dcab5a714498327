#include "laysum/error.hpp"

namespace laysum {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::Io: return "Io";
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::InvalidField: return "InvalidField";
    case ErrorCode::EmptyArticle: return "EmptyArticle";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::EmptyCollection: return "EmptyCollection";
    case ErrorCode::InvalidParam: return "InvalidParam";
    case ErrorCode::EmptyQuery: return "EmptyQuery";
    case ErrorCode::ScorerFailure: return "ScorerFailure";
    case ErrorCode::UnknownGoldId: return "UnknownGoldId";
    case ErrorCode::IndexFormat: return "IndexFormat";
    case ErrorCode::NonPositiveSigma: return "NonPositiveSigma";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::RelevanceOutOfRange: return "RelevanceOutOfRange";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::ZeroOldProb: return "ZeroOldProb";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ZeroN: return "ZeroN";
    case ErrorCode::EmptyReference: return "EmptyReference";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::GeneratorUnavailable: return "GeneratorUnavailable";
    case ErrorCode::QuerySourceUnavailable: return "QuerySourceUnavailable";
    case ErrorCode::EmptyPairs: return "EmptyPairs";
    case ErrorCode::BridgeUnavailable: return "BridgeUnavailable";
    case ErrorCode::BridgeProtocol: return "BridgeProtocol";
    }
    return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& detail, const std::string& message) {
    std::string out(to_string(code));
    if (!detail.empty()) {
        out += "(" + detail + ")";
    }
    if (!message.empty()) {
        out += ": " + message;
    }
    return out;
}

}  // namespace

Error::Error(ErrorCode code, std::string detail, const std::string& message)
    : std::runtime_error(compose(code, detail, message)), code_(code), detail_(std::move(detail)) {}

}  // namespace laysum
