#pragma once

#include <stdexcept>
#include <string>

namespace svsim {

// Base for every error raised by the library. Callers that only care about
// "the simulator refused" can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace svsim
