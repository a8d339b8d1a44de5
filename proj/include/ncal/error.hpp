#pragma once

#include <stdexcept>
#include <string>

namespace ncal {

enum class ErrorCode {
    ZeroNormMean,
    MissingSample,
    AlreadyLabeled,
    UnknownClass,
    TooFewClasses,
    TooFewCheckpoints,
    EmptyInput,
    BudgetExceedsPool,
    DegenerateBetween,
    InvalidSpec,
    DivergedTraining,
    BadMagic,
    TruncatedPayload,
    NonFiniteValue,
    IndexMismatch,
    BadFormat,
};

constexpr const char* error_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::ZeroNormMean: return "ZeroNormMean";
        case ErrorCode::MissingSample: return "MissingSample";
        case ErrorCode::AlreadyLabeled: return "AlreadyLabeled";
        case ErrorCode::UnknownClass: return "UnknownClass";
        case ErrorCode::TooFewClasses: return "TooFewClasses";
        case ErrorCode::TooFewCheckpoints: return "TooFewCheckpoints";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::BudgetExceedsPool: return "BudgetExceedsPool";
        case ErrorCode::DegenerateBetween: return "DegenerateBetween";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::DivergedTraining: return "DivergedTraining";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::TruncatedPayload: return "TruncatedPayload";
        case ErrorCode::NonFiniteValue: return "NonFiniteValue";
        case ErrorCode::IndexMismatch: return "IndexMismatch";
        case ErrorCode::BadFormat: return "BadFormat";
    }
    return "Error";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& msg)
        : std::runtime_error(std::string(error_name(code)) + ": " + msg), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& msg) {
    throw Error(code, msg);
}

}  // namespace ncal
