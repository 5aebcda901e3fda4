#pragma once

#include <stdexcept>
#include <string>

namespace urbc {

// Bad data or bad request: the caller gave us something we cannot work with.
// The CLI maps this to exit code 1.
class input_error : public std::runtime_error {
  public:
    explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// The data was acceptable but the computation cannot produce a meaningful
// result (degenerate matrix, ambiguous spectrum, ...). Exit code 2.
class computation_error : public std::runtime_error {
  public:
    explicit computation_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace urbc
