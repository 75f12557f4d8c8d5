#pragma once

#include <stdexcept>
#include <string>

namespace newsgate {

// Violations of data contracts (bad labels, duplicate ids, misaligned
// inputs). The CLI maps these to exit code 1.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable files, unparsable configuration, bad usage. Exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace newsgate
