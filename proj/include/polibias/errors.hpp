#pragma once

#include <stdexcept>
#include <string>

namespace polibias {

// Malformed or inconsistent input: files, labels, dimensions between
// fitted artifacts. Maps to exit code 2 in the CLI.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite objective values or a failed optimization. Exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace polibias
