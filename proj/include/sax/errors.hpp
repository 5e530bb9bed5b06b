#pragma once

#include <stdexcept>
#include <string>

namespace sax {

// Malformed or inconsistent input (bad parameters, wrong boundary variant for a domain, ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A computation that could not reach the requested accuracy or hit an unsupported case.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sax
