#pragma once

#include <stdexcept>
#include <string>

namespace vp2d {

// Exit-code categories used by the CLI: 0 ok, 1 config, 2 numerics, 3 io.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

struct NumericsError : std::runtime_error {
    explicit NumericsError(const std::string& m) : std::runtime_error(m) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace vp2d
