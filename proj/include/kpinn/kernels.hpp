#pragma once

#include "kpinn/activation.hpp"

// Batched dense kernels used by the training fast path. All batches are
// sample-major (row s = one sample). Parallel variants in kern:: are
// OpenMP-threaded yet thread-count invariant: every output element is
// accumulated serially in sample order by exactly one thread. kern::ref::
// holds plain serial loops with the same contracts, kept as the oracle for
// the parallel versions and for the kernel benchmark.
namespace kpinn::kern {

// z[s,a] = b[a] + sum_c h[s,c] * wt[c,a]; wt is the transposed weight
// matrix [in x out]; b may be null (treated as zero)
void affine_forward(int ns, int in, int out, const double* h, const double* wt,
                    const double* b, double* z);

// gin[s,c] = sum_a gout[s,a] * w[a,c]; w in natural [out x in] layout
void affine_backward_input(int ns, int in, int out, const double* gout,
                           const double* w, double* gin);

// dw[a,c] += sum_s gout[s,a] * h[s,c]; db[a] += sum_s gout[s,a]
// (db may be null). Accumulates into existing dw/db contents.
void affine_backward_params(int ns, int in, int out, const double* gout,
                            const double* h, double* dw, double* db);

// h[k] = sigma(z[k])
void act_forward(Activation act, int n, const double* z, double* h);

// a[k] = g[k] * sigma'(z[k]); sigma' is reconstructed from h for tanh/relu,
// from z for sin (z may be null otherwise)
void act_backward(Activation act, int n, const double* h, const double* z,
                  const double* g, double* a);

// forward tangent propagation through the activation:
// h = sigma(z), hth = sigma'(z)*zth, ht = sigma'(z)*zt
void dual_act_forward(Activation act, int n, const double* z, const double* zth,
                      const double* zt, double* h, double* hth, double* ht);

// reverse sweep of dual_act_forward: given adjoints (gu, gth, gt) of
// (h, hth, ht), produce adjoints (au, ath, at) of (z, zth, zt):
//   au  = gu*sigma' + (gth*zth + gt*zt)*sigma''
//   ath = gth*sigma',  at = gt*sigma'
// tanh uses the identity sigma''*zth = -2h*hth so only h-streams are read;
// sin needs z, zth, zt (may be null for tanh/relu)
void dual_act_backward(Activation act, int n, const double* h, const double* hth,
                       const double* ht, const double* z, const double* zth,
                       const double* zt, const double* gu, const double* gth,
                       const double* gt, double* au, double* ath, double* at);

// at[c,r] = a[r,c]
void transpose(int rows, int cols, const double* a, double* at);

// fixed-order 4-accumulator dot product (deterministic, ILP-friendly)
double dot(int n, const double* a, const double* b);

namespace ref {

void affine_forward(int ns, int in, int out, const double* h, const double* wt,
                    const double* b, double* z);
void affine_backward_input(int ns, int in, int out, const double* gout,
                           const double* w, double* gin);
void affine_backward_params(int ns, int in, int out, const double* gout,
                            const double* h, double* dw, double* db);
void act_forward(Activation act, int n, const double* z, double* h);
void act_backward(Activation act, int n, const double* h, const double* z,
                  const double* g, double* a);
void dual_act_forward(Activation act, int n, const double* z, const double* zth,
                      const double* zt, double* h, double* hth, double* ht);
void dual_act_backward(Activation act, int n, const double* h, const double* hth,
                       const double* ht, const double* z, const double* zth,
                       const double* zt, const double* gu, const double* gth,
                       const double* gt, double* au, double* ath, double* at);
double dot(int n, const double* a, const double* b);

}  // namespace ref

}  // namespace kpinn::kern
