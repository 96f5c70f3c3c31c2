#pragma once

#include "kpinn/activation.hpp"

namespace kpinn {

inline double scalar_zero(double) { return 0.0; }

inline double s_tanh(double x) { return fast_tanh(x); }
inline double s_sin(double x) { return std::sin(x); }
inline double s_cos(double x) { return std::cos(x); }
inline double s_relu(double x) { return x > 0.0 ? x : 0.0; }
inline double s_relu_step(double x) { return x > 0.0 ? 1.0 : 0.0; }

// Forward-mode number with two tangent channels, one per network input
// (theta and t). T is double for plain evaluation or tape::Var when the
// whole computation is being recorded for reverse mode.
template <class T>
struct Dual2 {
  T v;
  T dth;
  T dt;

  Dual2() = default;
  Dual2(const T& value) : v(value), dth(scalar_zero(value)), dt(scalar_zero(value)) {}
  Dual2(const T& value, const T& a, const T& b) : v(value), dth(a), dt(b) {}
};

template <class T>
Dual2<T> operator+(const Dual2<T>& a, const Dual2<T>& b) {
  return {a.v + b.v, a.dth + b.dth, a.dt + b.dt};
}

template <class T>
Dual2<T> operator-(const Dual2<T>& a, const Dual2<T>& b) {
  return {a.v - b.v, a.dth - b.dth, a.dt - b.dt};
}

template <class T>
Dual2<T> operator-(const Dual2<T>& a) {
  return {-a.v, -a.dth, -a.dt};
}

template <class T>
Dual2<T> operator*(const Dual2<T>& a, const Dual2<T>& b) {
  return {a.v * b.v, a.v * b.dth + a.dth * b.v, a.v * b.dt + a.dt * b.v};
}

template <class T>
Dual2<T> operator*(const T& a, const Dual2<T>& b) {
  return {a * b.v, a * b.dth, a * b.dt};
}

template <class T>
Dual2<T> operator*(const Dual2<T>& a, const T& b) {
  return b * a;
}

template <class T>
Dual2<T> operator+(const T& a, const Dual2<T>& b) {
  return {a + b.v, b.dth, b.dt};
}

template <class T>
Dual2<T> operator+(const Dual2<T>& a, const T& b) {
  return b + a;
}

// activation applied in dual arithmetic; the derivative factor is built from
// T operations so that, on a tape, it remains differentiable itself
template <class T>
Dual2<T> activate(Activation act, const Dual2<T>& z) {
  switch (act) {
    case Activation::kTanh: {
      T h = s_tanh(z.v);
      T d = T(1.0) - h * h;
      return {h, d * z.dth, d * z.dt};
    }
    case Activation::kSin: {
      T d = s_cos(z.v);
      return {s_sin(z.v), d * z.dth, d * z.dt};
    }
    case Activation::kRelu: {
      T d = s_relu_step(z.v);
      return {s_relu(z.v), d * z.dth, d * z.dt};
    }
  }
  return z;
}

inline double activate(Activation act, double z) { return eval_activation(act, z).h; }

}  // namespace kpinn
