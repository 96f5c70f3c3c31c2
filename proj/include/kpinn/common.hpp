#pragma once

#include <stdexcept>
#include <string>

namespace kpinn {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;

// raised when a forward pass or loss produces NaN/Inf; carries the layer
// (or component) where it was first seen
class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(const std::string& what, int layer = -1)
      : std::runtime_error(what), layer_(layer) {}
  int layer() const { return layer_; }

 private:
  int layer_;
};

}  // namespace kpinn
