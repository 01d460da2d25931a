#pragma once

#include <stdexcept>
#include <string>

namespace kramers {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rejected input (bad argument, violated precondition).
struct invalid_input : error {
  using error::error;
};

} // namespace kramers
