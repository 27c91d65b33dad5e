#pragma once

#include <stdexcept>
#include <string>

namespace rdslab {

// Invalid parameters, violated preconditions, malformed configuration.
class config_error : public std::invalid_argument {
public:
    explicit config_error(const std::string& what) : std::invalid_argument(what) {}
};

// A mathematically legitimate refusal: a hypothesis of the underlying theory
// fails for the requested inputs (non-contractive map, non-dissipative mode,
// missing spectral gap, ...). Distinct from config_error so the CLI can map
// it to its own exit code.
class numerical_refusal : public std::runtime_error {
public:
    explicit numerical_refusal(const std::string& what) : std::runtime_error(what) {}
};

class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace rdslab
