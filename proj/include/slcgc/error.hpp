#pragma once

#include <stdexcept>
#include <string>

namespace slcgc {

// Single exception type for every recoverable failure in the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace slcgc
