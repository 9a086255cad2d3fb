#pragma once

#include <stdexcept>
#include <string>

// Error taxonomy shared by library and CLI. The CLI maps these to process
// exit codes: validation -> 1, numeric -> 2, data format -> 3.

namespace tltk {

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tltk
