#pragma once

#include <stdexcept>
#include <string>

namespace blockrg {

// Enumeration budgets are explicit; exceeding one is a hard error, never a
// silent truncation.
struct cap_exceeded : std::runtime_error {
    explicit cap_exceeded(const std::string& what) : std::runtime_error(what) {}
};

// An expansion parameter sits at or past its divergence point.
struct divergent_expansion : std::runtime_error {
    explicit divergent_expansion(const std::string& what) : std::runtime_error(what) {}
};

struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace blockrg
