#include "kpinn/kernels.hpp"

#include <cstddef>

// Plain serial loops, one element at a time, written independently of the
// parallel kernels so they can serve as an oracle and a benchmark baseline.
namespace kpinn::kern::ref {

using std::size_t;

void affine_forward(int ns, int in, int out, const double* h, const double* wt,
                    const double* b, double* z) {
  for (int s = 0; s < ns; ++s)
    for (int a = 0; a < out; ++a) {
      double acc = b ? b[a] : 0.0;
      for (int c = 0; c < in; ++c)
        acc += h[static_cast<size_t>(s) * in + c] * wt[static_cast<size_t>(c) * out + a];
      z[static_cast<size_t>(s) * out + a] = acc;
    }
}

void affine_backward_input(int ns, int in, int out, const double* gout,
                           const double* w, double* gin) {
  for (int s = 0; s < ns; ++s)
    for (int c = 0; c < in; ++c) {
      double acc = 0.0;
      for (int a = 0; a < out; ++a)
        acc += gout[static_cast<size_t>(s) * out + a] * w[static_cast<size_t>(a) * in + c];
      gin[static_cast<size_t>(s) * in + c] = acc;
    }
}

void affine_backward_params(int ns, int in, int out, const double* gout,
                            const double* h, double* dw, double* db) {
  for (int a = 0; a < out; ++a) {
    for (int c = 0; c < in; ++c) {
      double acc = 0.0;
      for (int s = 0; s < ns; ++s)
        acc += gout[static_cast<size_t>(s) * out + a] * h[static_cast<size_t>(s) * in + c];
      dw[static_cast<size_t>(a) * in + c] += acc;
    }
    if (db) {
      double acc = 0.0;
      for (int s = 0; s < ns; ++s) acc += gout[static_cast<size_t>(s) * out + a];
      db[a] += acc;
    }
  }
}

void act_forward(Activation act, int n, const double* z, double* h) {
  for (int k = 0; k < n; ++k) h[k] = eval_activation(act, z[k]).h;
}

void act_backward(Activation act, int n, const double* h, const double* z,
                  const double* g, double* a) {
  for (int k = 0; k < n; ++k) {
    double d;
    switch (act) {
      case Activation::kTanh: d = 1.0 - h[k] * h[k]; break;
      case Activation::kSin: d = std::cos(z[k]); break;
      default: d = h[k] > 0.0 ? 1.0 : 0.0; break;
    }
    a[k] = g[k] * d;
  }
}

void dual_act_forward(Activation act, int n, const double* z, const double* zth,
                      const double* zt, double* h, double* hth, double* ht) {
  for (int k = 0; k < n; ++k) {
    const ActEval e = eval_activation(act, z[k]);
    h[k] = e.h;
    hth[k] = e.d * zth[k];
    ht[k] = e.d * zt[k];
  }
}

void dual_act_backward(Activation act, int n, const double* h, const double* hth,
                       const double* ht, const double* z, const double* zth,
                       const double* zt, const double* gu, const double* gth,
                       const double* gt, double* au, double* ath, double* at) {
  for (int k = 0; k < n; ++k) {
    double d, ddzth, ddzt;
    switch (act) {
      case Activation::kTanh:
        d = 1.0 - h[k] * h[k];
        ddzth = -2.0 * h[k] * hth[k];
        ddzt = -2.0 * h[k] * ht[k];
        break;
      case Activation::kSin:
        d = std::cos(z[k]);
        ddzth = -h[k] * zth[k];
        ddzt = -h[k] * zt[k];
        break;
      default:
        d = h[k] > 0.0 ? 1.0 : 0.0;
        ddzth = 0.0;
        ddzt = 0.0;
        break;
    }
    au[k] = gu[k] * d + gth[k] * ddzth + gt[k] * ddzt;
    ath[k] = gth[k] * d;
    at[k] = gt[k] * d;
  }
}

double dot(int n, const double* a, const double* b) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace kpinn::kern::ref
