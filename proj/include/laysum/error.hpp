#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace laysum {

enum class ErrorCode {
    Io,
    MalformedJson,
    MissingField,
    InvalidField,
    EmptyArticle,
    EmptyText,
    DuplicateId,
    EmptyCollection,
    InvalidParam,
    EmptyQuery,
    ScorerFailure,
    UnknownGoldId,
    IndexFormat,
    NonPositiveSigma,
    InvalidConfig,
    RelevanceOutOfRange,
    DimMismatch,
    ZeroOldProb,
    LengthMismatch,
    ZeroN,
    EmptyReference,
    EmptyInput,
    GeneratorUnavailable,
    QuerySourceUnavailable,
    EmptyPairs,
    BridgeUnavailable,
    BridgeProtocol,
};

std::string_view to_string(ErrorCode code);

// Every failure in the library surfaces as this type. `detail` carries the
// offending field name, id or stage so callers can match on it without
// parsing the message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string detail, const std::string& message = {});

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

}  // namespace laysum
