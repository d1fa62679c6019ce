#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace jdr {

enum class ErrorKind {
    DimensionMismatch,
    NonFiniteValue,
    DegenerateData,
    RankTooLarge,
    BudgetOutOfRange,
    NotOrthonormal,
    NonPositiveValue,
    EmptyPositives,
    IndexOutOfRange,
    InvalidArgument,
    MemoryBudget,
    Io,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::NonFiniteValue: return "NonFiniteValue";
        case ErrorKind::DegenerateData: return "DegenerateData";
        case ErrorKind::RankTooLarge: return "RankTooLarge";
        case ErrorKind::BudgetOutOfRange: return "BudgetOutOfRange";
        case ErrorKind::NotOrthonormal: return "NotOrthonormal";
        case ErrorKind::NonPositiveValue: return "NonPositiveValue";
        case ErrorKind::EmptyPositives: return "EmptyPositives";
        case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::MemoryBudget: return "MemoryBudget";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a kind so callers (and the CLI
/// exit-code mapping) can branch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), message_(message) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& message() const noexcept { return message_; }

    /// Numerical failures (as opposed to invalid input) map to a distinct exit code.
    bool is_numerical() const noexcept { return kind_ == ErrorKind::DegenerateData; }

private:
    ErrorKind kind_;
    std::string message_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) fail(kind, message);
}

}  // namespace jdr
