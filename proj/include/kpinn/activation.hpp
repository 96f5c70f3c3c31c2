#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace kpinn {

enum class Activation { kTanh, kSin, kRelu };

inline const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kTanh: return "tanh";
    case Activation::kSin: return "sin";
    case Activation::kRelu: return "relu";
  }
  return "?";
}

inline Activation parse_activation(const std::string& s) {
  if (s == "tanh") return Activation::kTanh;
  if (s == "sin" || s == "sine") return Activation::kSin;
  if (s == "relu" || s == "ReLU") return Activation::kRelu;
  throw std::invalid_argument("unknown activation '" + s + "' (expected tanh|sin|relu)");
}

namespace detail {

// e^y for y in [0, 45], branch-free so batched loops vectorize.
// Split y = k ln2 + r, e^r by degree-13 Taylor on |r| <= ln2/2, scale by 2^k.
inline double exp_pos(double y) {
  constexpr double kLog2e = 1.4426950408889634074;
  constexpr double kLn2Hi = 6.93147180369123816490e-01;
  constexpr double kLn2Lo = 1.90821492927058770002e-10;
  double kd = std::floor(y * kLog2e + 0.5);
  double r = (y - kd * kLn2Hi) - kd * kLn2Lo;
  double p = 1.0 / 6227020800.0;  // 1/13!
  p = p * r + 1.0 / 479001600.0;
  p = p * r + 1.0 / 39916800.0;
  p = p * r + 1.0 / 3628800.0;
  p = p * r + 1.0 / 362880.0;
  p = p * r + 1.0 / 40320.0;
  p = p * r + 1.0 / 5040.0;
  p = p * r + 1.0 / 720.0;
  p = p * r + 1.0 / 120.0;
  p = p * r + 1.0 / 24.0;
  p = p * r + 1.0 / 6.0;
  p = p * r + 0.5;
  p = p * r + 1.0;
  p = p * r + 1.0;
  std::int64_t k = static_cast<std::int64_t>(kd);
  double scale = std::bit_cast<double>(static_cast<std::uint64_t>(1023 + k) << 52);
  return p * scale;
}

}  // namespace detail

// tanh(x) = sign(x) (1 - 2/(e^{2|x|}+1)), saturating for |x| > 19 where the
// double result is exactly +-1 anyway. Accurate to ~1 ulp of std::tanh and
// vectorizable, which matters: training evaluates it ~10^7 times per epoch.
inline double fast_tanh(double x) {
  double ax = std::fabs(x);
  double y = 2.0 * std::fmin(ax, 19.0);  // fmin, not ?:, so the loop vectorizes
  double e = detail::exp_pos(y);
  double t = 1.0 - 2.0 / (e + 1.0);
  return std::copysign(t, x);
}

// value, first and second derivative of the activation at z
struct ActEval {
  double h;   // sigma(z)
  double d;   // sigma'(z)
  double dd;  // sigma''(z)
};

inline ActEval eval_activation(Activation a, double z) {
  switch (a) {
    case Activation::kTanh: {
      double h = fast_tanh(z);
      double d = 1.0 - h * h;
      return {h, d, -2.0 * h * d};
    }
    case Activation::kSin:
      return {std::sin(z), std::cos(z), -std::sin(z)};
    case Activation::kRelu: {
      double step = z > 0.0 ? 1.0 : 0.0;
      return {z > 0.0 ? z : 0.0, step, 0.0};
    }
  }
  return {0.0, 0.0, 0.0};
}

}  // namespace kpinn
