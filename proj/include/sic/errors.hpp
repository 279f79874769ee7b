#pragma once

#include <stdexcept>
#include <string>

namespace sic {

// Exception hierarchy. The CLI maps each family onto a stable exit code.

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ContractError : public Error {
public:
    using Error::Error;
};

class SingularityError : public Error {
public:
    SingularityError(const std::string& what, double condition)
        : Error(what), condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, int epoch, long batch)
        : Error(what), epoch_(epoch), batch_(batch) {}
    int epoch() const noexcept { return epoch_; }
    long batch() const noexcept { return batch_; }

private:
    int epoch_;
    long batch_;
};

class MetricError : public Error {
public:
    using Error::Error;
};

class IncompatibleError : public Error {
public:
    using Error::Error;
};

enum class ParseErrorKind { bad_magic, bad_version, truncated, count_mismatch, bad_csv, bad_model };

inline const char* to_string(ParseErrorKind k) {
    switch (k) {
    case ParseErrorKind::bad_magic: return "bad magic";
    case ParseErrorKind::bad_version: return "unsupported version";
    case ParseErrorKind::truncated: return "truncated payload";
    case ParseErrorKind::count_mismatch: return "count mismatch";
    case ParseErrorKind::bad_csv: return "malformed csv";
    case ParseErrorKind::bad_model: return "malformed model";
    }
    return "parse error";
}

class ParseError : public Error {
public:
    ParseError(ParseErrorKind kind, const std::string& detail)
        : Error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}
    ParseErrorKind kind() const noexcept { return kind_; }

private:
    ParseErrorKind kind_;
};

class ResourceCapError : public Error {
public:
    using Error::Error;
};

} // namespace sic
