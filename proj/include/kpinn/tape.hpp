#pragma once

#include <cstddef>
#include <vector>

#include "kpinn/activation.hpp"

namespace kpinn {

class Tape;

// Scalar tracked on a reverse-mode tape. A Var with tape == nullptr is a
// plain constant; arithmetic between constants folds and records nothing, so
// mixed double/Var expressions stay cheap.
struct Var {
  Tape* tape = nullptr;
  int idx = -1;
  double v = 0.0;

  Var() = default;
  Var(double value) : v(value) {}
  bool tracked() const { return tape != nullptr; }
};

// Wengert list: each node stores up to two parents with local partials fixed
// at record time. One reverse sweep yields the adjoint of every node.
class Tape {
 public:
  Var input(double value) {
    const int idx = push(-1, 0.0, -1, 0.0);
    Var x(value);
    x.tape = this;
    x.idx = idx;
    return x;
  }

  int push(int p0, double w0, int p1, double w1) {
    p0_.push_back(p0);
    p1_.push_back(p1);
    w0_.push_back(w0);
    w1_.push_back(w1);
    return static_cast<int>(p0_.size()) - 1;
  }

  std::size_t size() const { return p0_.size(); }

  // adjoint of every node w.r.t. `output`; inputs created first occupy the
  // leading entries, so the caller can slice the parameter gradient directly
  std::vector<double> gradient(const Var& output) const;

 private:
  std::vector<int> p0_, p1_;
  std::vector<double> w0_, w1_;
};

inline Var record1(Tape* tape, double value, int p, double w) {
  Var out(value);
  out.tape = tape;
  out.idx = tape->push(p, w, -1, 0.0);
  return out;
}

inline Var record2(Tape* tape, double value, int pa, double wa, int pb, double wb) {
  Var out(value);
  out.tape = tape;
  out.idx = tape->push(pa, wa, pb, wb);
  return out;
}

inline Var operator+(const Var& a, const Var& b) {
  if (a.tracked() && b.tracked()) return record2(a.tape, a.v + b.v, a.idx, 1.0, b.idx, 1.0);
  if (a.tracked()) return b.v == 0.0 ? a : record1(a.tape, a.v + b.v, a.idx, 1.0);
  if (b.tracked()) return a.v == 0.0 ? b : record1(b.tape, a.v + b.v, b.idx, 1.0);
  return Var(a.v + b.v);
}

inline Var operator-(const Var& a, const Var& b) {
  if (a.tracked() && b.tracked()) return record2(a.tape, a.v - b.v, a.idx, 1.0, b.idx, -1.0);
  if (a.tracked()) return b.v == 0.0 ? a : record1(a.tape, a.v - b.v, a.idx, 1.0);
  if (b.tracked()) return record1(b.tape, a.v - b.v, b.idx, -1.0);
  return Var(a.v - b.v);
}

inline Var operator-(const Var& a) {
  if (a.tracked()) return record1(a.tape, -a.v, a.idx, -1.0);
  return Var(-a.v);
}

inline Var operator*(const Var& a, const Var& b) {
  if (a.tracked() && b.tracked()) return record2(a.tape, a.v * b.v, a.idx, b.v, b.idx, a.v);
  if (a.tracked()) {
    if (b.v == 0.0) return Var(0.0);  // exact: d(a*0)/da = 0
    if (b.v == 1.0) return a;
    return record1(a.tape, a.v * b.v, a.idx, b.v);
  }
  if (b.tracked()) {
    if (a.v == 0.0) return Var(0.0);
    if (a.v == 1.0) return b;
    return record1(b.tape, a.v * b.v, b.idx, a.v);
  }
  return Var(a.v * b.v);
}

inline Var operator/(const Var& a, double c) { return a * Var(1.0 / c); }

inline Var scalar_zero(const Var&) { return Var(0.0); }

inline Var s_tanh(const Var& x) {
  const double h = fast_tanh(x.v);
  if (!x.tracked()) return Var(h);
  return record1(x.tape, h, x.idx, 1.0 - h * h);
}

inline Var s_sin(const Var& x) {
  if (!x.tracked()) return Var(std::sin(x.v));
  return record1(x.tape, std::sin(x.v), x.idx, std::cos(x.v));
}

inline Var s_cos(const Var& x) {
  if (!x.tracked()) return Var(std::cos(x.v));
  return record1(x.tape, std::cos(x.v), x.idx, -std::sin(x.v));
}

inline Var s_relu(const Var& x) {
  if (!x.tracked()) return Var(x.v > 0.0 ? x.v : 0.0);
  if (x.v > 0.0) return x;
  return Var(0.0);
}

// derivative of the step itself is zero a.e., so the result is a constant
inline Var s_relu_step(const Var& x) { return Var(x.v > 0.0 ? 1.0 : 0.0); }

inline Var activate(Activation act, const Var& z) {
  switch (act) {
    case Activation::kTanh: return s_tanh(z);
    case Activation::kSin: return s_sin(z);
    case Activation::kRelu: return s_relu(z);
  }
  return z;
}

}  // namespace kpinn
