#pragma once

#include <stdexcept>
#include <string>

namespace citerank {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown by the segmenter for whitespace-only input.
class EmptyDocument : public Error {
public:
    EmptyDocument() : Error("document is empty or whitespace-only") {}
};

class ParseError : public Error {
public:
    enum class Kind { MalformedTag, MalformedSpan, StrayText };

    ParseError(Kind kind, std::string what, std::size_t offset)
        : Error(std::string(kind_name(kind)) + " at byte " + std::to_string(offset) + ": " + what),
          kind_(kind),
          offset_(offset) {}

    Kind kind() const noexcept { return kind_; }
    std::size_t offset() const noexcept { return offset_; }

    static const char* kind_name(Kind kind) noexcept {
        switch (kind) {
            case Kind::MalformedTag: return "MalformedTag";
            case Kind::MalformedSpan: return "MalformedSpan";
            case Kind::StrayText: return "StrayText";
        }
        return "ParseError";
    }

private:
    Kind kind_;
    std::size_t offset_;
};

/// Failure reported by a Scorer. Only the backend kinds are retryable.
class ScorerError : public Error {
public:
    enum class Kind { BackendUnavailable, BackendTimeout, InvalidRequest, UnknownStatement };

    ScorerError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }
    bool retryable() const noexcept {
        return kind_ == Kind::BackendUnavailable || kind_ == Kind::BackendTimeout;
    }

private:
    Kind kind_;
};

class AllScoringFailed : public Error {
public:
    using Error::Error;
};

class BalancingInfeasible : public Error {
public:
    using Error::Error;
};

class AnchorsExceedBudget : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Bad or inconsistent pipeline configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Unreadable or malformed input data.
class InputError : public Error {
public:
    using Error::Error;
};

}  // namespace citerank
