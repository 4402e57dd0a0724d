#pragma once

#include <stdexcept>
#include <string>

namespace ttekit {

// Rejected input: bad config, malformed file, violated precondition.
// The CLI maps this to exit code 1; everything else to 2.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ttekit
