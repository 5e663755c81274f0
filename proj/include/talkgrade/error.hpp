#pragma once

#include <stdexcept>
#include <string>

namespace talkgrade {

// Every recoverable failure in the library surfaces as this type; the CLI
// maps it to a diagnostic line and a nonzero exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace talkgrade
