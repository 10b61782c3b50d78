#pragma once

#include <stdexcept>
#include <string>

namespace hs {

// Exception carrying a short machine-readable reason code (e.g. "shape_mismatch").
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

}  // namespace hs
