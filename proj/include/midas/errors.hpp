#pragma once

#include <stdexcept>
#include <string>

namespace midas {

// Thrown when a weighted selection or normalization has no mass to work
// with: empty particle store, all-zero scores, or an all-zero weight vector.
class degenerate_weights_error : public std::runtime_error {
 public:
  explicit degenerate_weights_error(const std::string& what)
      : std::runtime_error(what) {}
};

// Thrown for inputs that are well formed but outside what this build
// supports (for example grid distances above two dimensions).
class unsupported_error : public std::runtime_error {
 public:
  explicit unsupported_error(const std::string& what)
      : std::runtime_error(what) {}
};

// Thrown when an input file has malformed content; carries the 1-based row.
class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& what, long row)
      : std::runtime_error(what + " (row " + std::to_string(row) + ")"),
        row_(row) {}
  long row() const noexcept { return row_; }

 private:
  long row_;
};

// Thrown when a config file or flag combination is invalid. The CLI maps
// this to exit code 2.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown on filesystem failures (unreadable input, unwritable output). The
// CLI maps this to exit code 3.
class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace midas
