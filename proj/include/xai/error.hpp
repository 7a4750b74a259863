#pragma once

#include <stdexcept>
#include <string>

namespace xai {

// Error categories map onto CLI exit codes.
enum class ErrorKind {
    Usage = 2,   // bad arguments, unknown explainer key
    Data = 3,    // malformed CSV/schema, invariant violation
    Model = 4,   // model/protocol failure
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline Error usage_error(const std::string& msg) { return Error(ErrorKind::Usage, msg); }
inline Error data_error(const std::string& msg) { return Error(ErrorKind::Data, msg); }
inline Error model_error(const std::string& msg) { return Error(ErrorKind::Model, msg); }

}  // namespace xai
