#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qls {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown by strict-saturation runs on the first saturated encoding.
class SaturationError : public Error {
 public:
  SaturationError(std::size_t round, std::size_t node)
      : Error("quantizer saturated at round " + std::to_string(round) +
              " (node " + std::to_string(node + 1) + ")"),
        round_(round),
        node_(node) {}

  std::size_t round() const noexcept { return round_; }
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t round_;
  std::size_t node_;
};

}  // namespace qls
