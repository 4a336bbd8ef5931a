// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace gwi {

enum class ParamErrorKind { OutOfRange, NonPmf };

/// Rejection of a parameter set; names the field and the violated bound.
class ParamError : public std::invalid_argument {
public:
    ParamError(ParamErrorKind kind, std::string field, std::string bound)
        : std::invalid_argument(describe(kind, field, bound)),
          kind_(kind), field_(std::move(field)), bound_(std::move(bound)) {}

    ParamErrorKind kind() const noexcept { return kind_; }
    const std::string& field() const noexcept { return field_; }
    const std::string& bound() const noexcept { return bound_; }

private:
    static std::string describe(ParamErrorKind kind, const std::string& field,
                                const std::string& bound) {
        const char* tag = kind == ParamErrorKind::OutOfRange ? "OutOfRange" : "NonPmf";
        return std::string(tag) + "(" + field + ", " + bound + ")";
    }

    ParamErrorKind kind_;
    std::string field_;
    std::string bound_;
};

enum class ErrorCode {
    DegenerateTheta,
    DegenerateConditioning,
    WrongRegime,
    MissingK5,
    MissingRenewal,
    InsufficientLength,
    TolUnreachable,
    CapTooSmall,
    InvalidArgument,
};

const char* to_string(ErrorCode code) noexcept;

class NumericError : public std::runtime_error {
public:
    NumericError(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace gwi
