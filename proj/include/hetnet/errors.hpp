#pragma once

#include <stdexcept>
#include <string>

namespace hetnet {

// Exit-code categories surfaced by the CLI.
enum class ErrorCategory { config = 2, runtime = 3, io = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory cat, const std::string& what) : std::runtime_error(what), cat_(cat) {}
    ErrorCategory category() const noexcept { return cat_; }

private:
    ErrorCategory cat_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

struct RunError : Error {
    explicit RunError(const std::string& what) : Error(ErrorCategory::runtime, what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

} // namespace hetnet
