#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dcvqkd {

/// Base of every error raised by the library. `name()` is the stable
/// identifier surfaced by the CLI diagnostics (e.g. "GridMismatch").
class Error : public std::runtime_error {
public:
    Error(std::string_view name, const std::string& what)
        : std::runtime_error(std::string(name) + ": " + what), name_(name) {}

    std::string_view name() const noexcept { return name_; }

private:
    std::string_view name_;
};

#define DCVQKD_DEFINE_ERROR(Type)                                      \
    class Type : public Error {                                        \
    public:                                                            \
        explicit Type(const std::string& what) : Error(#Type, what) {} \
    }

DCVQKD_DEFINE_ERROR(GridMismatch);
DCVQKD_DEFINE_ERROR(DegenerateWavepacket);
DCVQKD_DEFINE_ERROR(TruncationError);
DCVQKD_DEFINE_ERROR(InvalidParameter);
DCVQKD_DEFINE_ERROR(DegenerateKernel);
DCVQKD_DEFINE_ERROR(ResolutionError);

#undef DCVQKD_DEFINE_ERROR

/// Configuration problems (parse failures, missing or malformed fields).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("ConfigError", what) {}
};

} // namespace dcvqkd
