#include "kpinn/kernels.hpp"

#include <algorithm>
#include <cstddef>

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

namespace kpinn::kern {

namespace {
constexpr int kSBlock = 64;  // sample block so h/gout tiles stay in L2
using std::size_t;

// Y[ns x n] += X[ns x k] * M[k x n], all row-major.  Per output element the
// contraction runs in ascending k, matching the naive loop bit for bit; the
// AVX-512 path only blocks samples/columns to keep accumulators in registers.
#if defined(__AVX512F__)

template <int MR>
inline void mm_tile16(int k, int n, const double* x, size_t xs, const double* m, double* y,
                      size_t ys) {
  // accumulators start from the existing y so the whole contraction is one
  // fused chain ((y + x0*m0) + x1*m1) ... exactly as the reference writes it
  __m512d acc0[MR], acc1[MR];
  for (int i = 0; i < MR; ++i) {
    acc0[i] = _mm512_loadu_pd(y + i * ys);
    acc1[i] = _mm512_loadu_pd(y + i * ys + 8);
  }
  for (int c = 0; c < k; ++c) {
    const double* mr = m + static_cast<size_t>(c) * n;
    const __m512d m0 = _mm512_loadu_pd(mr);
    const __m512d m1 = _mm512_loadu_pd(mr + 8);
    for (int i = 0; i < MR; ++i) {
      const __m512d xv = _mm512_set1_pd(x[i * xs + c]);
      acc0[i] = _mm512_fmadd_pd(xv, m0, acc0[i]);
      acc1[i] = _mm512_fmadd_pd(xv, m1, acc1[i]);
    }
  }
  for (int i = 0; i < MR; ++i) {
    double* yi = y + i * ys;
    _mm512_storeu_pd(yi, acc0[i]);
    _mm512_storeu_pd(yi + 8, acc1[i]);
  }
}

inline void mm_accum(int ns, int k, int n, const double* x, const double* m, double* y) {
  const int n16 = n & ~15;
#pragma omp parallel for schedule(static)
  for (int sb = 0; sb < (ns + 5) / 6; ++sb) {
    const int s = sb * 6;
    const int mr = std::min(6, ns - s);
    const double* xs = x + static_cast<size_t>(s) * k;
    double* ys = y + static_cast<size_t>(s) * n;
    for (int j = 0; j < n16; j += 16) {
      switch (mr) {
        case 6: mm_tile16<6>(k, n, xs, k, m + j, ys + j, n); break;
        case 5: mm_tile16<5>(k, n, xs, k, m + j, ys + j, n); break;
        case 4: mm_tile16<4>(k, n, xs, k, m + j, ys + j, n); break;
        case 3: mm_tile16<3>(k, n, xs, k, m + j, ys + j, n); break;
        case 2: mm_tile16<2>(k, n, xs, k, m + j, ys + j, n); break;
        default: mm_tile16<1>(k, n, xs, k, m + j, ys + j, n); break;
      }
    }
    for (int i = 0; i < mr; ++i) {
      const double* xi = xs + static_cast<size_t>(i) * k;
      double* yi = ys + static_cast<size_t>(i) * n;
      for (int j = n16; j < n; ++j) {
        double acc = yi[j];
        for (int c = 0; c < k; ++c) acc += xi[c] * m[static_cast<size_t>(c) * n + j];
        yi[j] = acc;
      }
    }
  }
}

#else

inline void mm_accum(int ns, int k, int n, const double* x, const double* m, double* y) {
#pragma omp parallel for schedule(static)
  for (int s = 0; s < ns; ++s) {
    const double* xs = x + static_cast<size_t>(s) * k;
    double* ys = y + static_cast<size_t>(s) * n;
    for (int c = 0; c < k; ++c) {
      const double xv = xs[c];
      const double* mr = m + static_cast<size_t>(c) * n;
      for (int j = 0; j < n; ++j) ys[j] += xv * mr[j];
    }
  }
}

#endif  // __AVX512F__

#if defined(__AVX512F__) && defined(__AVX512DQ__)
#define KPINN_VEC_TANH 1

// vector twin of detail::exp_pos / fast_tanh, operation-for-operation, so the
// batched path is bitwise identical to the scalar one
inline __m512d v_exp_pos(__m512d y) {
  const __m512d log2e = _mm512_set1_pd(1.4426950408889634074);
  const __m512d ln2hi = _mm512_set1_pd(6.93147180369123816490e-01);
  const __m512d ln2lo = _mm512_set1_pd(1.90821492927058770002e-10);
  const __m512d kd = _mm512_roundscale_pd(_mm512_fmadd_pd(y, log2e, _mm512_set1_pd(0.5)),
                                          _MM_FROUND_TO_NEG_INF | _MM_FROUND_NO_EXC);
  __m512d r = _mm512_fnmadd_pd(kd, ln2hi, y);
  r = _mm512_fnmadd_pd(kd, ln2lo, r);
  __m512d p = _mm512_set1_pd(1.0 / 6227020800.0);
  p = _mm512_fmadd_pd(p, r, _mm512_set1_pd(1.0 / 479001600.0));
  p = _mm512_fmadd_pd(p, r, _mm512_set1_pd(1.0 / 39916800.0));
  p = _mm512_fmadd_pd(p, r, _mm512_set1_pd(1.0 / 3628800.0));
  p = _mm512_fmadd_pd(p, r, _mm512_set1_pd(1.0 / 362880.0));
  p = _mm512_fmadd_pd(p, r, _mm512_set1_pd(1.0 / 40320.0));
  p = _mm512_fmadd_pd(p, r, _mm512_set1_pd(1.0 / 5040.0));
  p = _mm512_fmadd_pd(p, r, _mm512_set1_pd(1.0 / 720.0));
  p = _mm512_fmadd_pd(p, r, _mm512_set1_pd(1.0 / 120.0));
  p = _mm512_fmadd_pd(p, r, _mm512_set1_pd(1.0 / 24.0));
  p = _mm512_fmadd_pd(p, r, _mm512_set1_pd(1.0 / 6.0));
  p = _mm512_fmadd_pd(p, r, _mm512_set1_pd(0.5));
  p = _mm512_fmadd_pd(p, r, _mm512_set1_pd(1.0));
  p = _mm512_fmadd_pd(p, r, _mm512_set1_pd(1.0));
  const __m512i k = _mm512_cvttpd_epi64(kd);
  const __m512i bits = _mm512_slli_epi64(_mm512_add_epi64(k, _mm512_set1_epi64(1023)), 52);
  return _mm512_mul_pd(p, _mm512_castsi512_pd(bits));
}

inline __m512d v_fast_tanh(__m512d x) {
  const __m512d sign_mask = _mm512_set1_pd(-0.0);
  const __m512d ax = _mm512_andnot_pd(sign_mask, x);
  const __m512d y = _mm512_mul_pd(_mm512_set1_pd(2.0), _mm512_min_pd(ax, _mm512_set1_pd(19.0)));
  const __m512d e = v_exp_pos(y);
  const __m512d t = _mm512_sub_pd(
      _mm512_set1_pd(1.0),
      _mm512_div_pd(_mm512_set1_pd(2.0), _mm512_add_pd(e, _mm512_set1_pd(1.0))));
  // copysign(t, x)
  return _mm512_or_pd(t, _mm512_and_pd(sign_mask, x));
}

inline void tanh_forward_vec(int n, const double* z, double* h) {
  int k = 0;
  for (; k + 8 <= n; k += 8) _mm512_storeu_pd(h + k, v_fast_tanh(_mm512_loadu_pd(z + k)));
  if (k < n) {
    const __mmask8 m = static_cast<__mmask8>((1u << (n - k)) - 1u);
    _mm512_mask_storeu_pd(h + k, m, v_fast_tanh(_mm512_maskz_loadu_pd(m, z + k)));
  }
}

inline void tanh_dual_forward_vec(int n, const double* z, const double* zth, const double* zt,
                                  double* h, double* hth, double* ht) {
  const __m512d one = _mm512_set1_pd(1.0);
  int k = 0;
  for (; k + 8 <= n; k += 8) {
    const __m512d hk = v_fast_tanh(_mm512_loadu_pd(z + k));
    const __m512d d = _mm512_fnmadd_pd(hk, hk, one);
    _mm512_storeu_pd(h + k, hk);
    _mm512_storeu_pd(hth + k, _mm512_mul_pd(d, _mm512_loadu_pd(zth + k)));
    _mm512_storeu_pd(ht + k, _mm512_mul_pd(d, _mm512_loadu_pd(zt + k)));
  }
  if (k < n) {
    const __mmask8 m = static_cast<__mmask8>((1u << (n - k)) - 1u);
    const __m512d hk = v_fast_tanh(_mm512_maskz_loadu_pd(m, z + k));
    const __m512d d = _mm512_fnmadd_pd(hk, hk, one);
    _mm512_mask_storeu_pd(h + k, m, hk);
    _mm512_mask_storeu_pd(hth + k, m, _mm512_mul_pd(d, _mm512_maskz_loadu_pd(m, zth + k)));
    _mm512_mask_storeu_pd(ht + k, m, _mm512_mul_pd(d, _mm512_maskz_loadu_pd(m, zt + k)));
  }
}
#endif  // AVX512F && AVX512DQ

}  // namespace

void affine_forward(int ns, int in, int out, const double* h, const double* wt,
                    const double* b, double* z) {
#pragma omp parallel for schedule(static)
  for (int s = 0; s < ns; ++s) {
    double* zs = z + static_cast<size_t>(s) * out;
    if (b)
      std::copy(b, b + out, zs);
    else
      std::fill(zs, zs + out, 0.0);
  }
  mm_accum(ns, in, out, h, wt, z);
}

void affine_backward_input(int ns, int in, int out, const double* gout,
                           const double* w, double* gin) {
#pragma omp parallel for schedule(static)
  for (int s = 0; s < ns; ++s) {
    double* gi = gin + static_cast<size_t>(s) * in;
    std::fill(gi, gi + in, 0.0);
  }
  mm_accum(ns, out, in, gout, w, gin);
}

void affine_backward_params(int ns, int in, int out, const double* gout,
                            const double* h, double* dw, double* db) {
  // serial outer blocks + one owner thread per row block keep every dw entry
  // accumulated in a fixed order regardless of thread count
  for (int s0 = 0; s0 < ns; s0 += kSBlock) {
    const int s1 = std::min(ns, s0 + kSBlock);
#if defined(__AVX512F__)
    const int in16 = in & ~15;
#pragma omp parallel for schedule(static)
    for (int ab = 0; ab < (out + 3) / 4; ++ab) {
      const int a0 = ab * 4;
      const int mr = std::min(4, out - a0);
      for (int c = 0; c < in16; c += 16) {
        __m512d acc0[4], acc1[4];
        for (int i = 0; i < 4; ++i) {
          acc0[i] = _mm512_setzero_pd();
          acc1[i] = _mm512_setzero_pd();
        }
        for (int s = s0; s < s1; ++s) {
          const double* gs = gout + static_cast<size_t>(s) * out + a0;
          const double* hs = h + static_cast<size_t>(s) * in + c;
          const __m512d h0 = _mm512_loadu_pd(hs);
          const __m512d h1 = _mm512_loadu_pd(hs + 8);
          for (int i = 0; i < mr; ++i) {
            const __m512d g = _mm512_set1_pd(gs[i]);
            acc0[i] = _mm512_fmadd_pd(g, h0, acc0[i]);
            acc1[i] = _mm512_fmadd_pd(g, h1, acc1[i]);
          }
        }
        for (int i = 0; i < mr; ++i) {
          double* dwa = dw + static_cast<size_t>(a0 + i) * in + c;
          _mm512_storeu_pd(dwa, _mm512_add_pd(_mm512_loadu_pd(dwa), acc0[i]));
          _mm512_storeu_pd(dwa + 8, _mm512_add_pd(_mm512_loadu_pd(dwa + 8), acc1[i]));
        }
      }
      for (int i = 0; i < mr; ++i) {
        const int a = a0 + i;
        double* dwa = dw + static_cast<size_t>(a) * in;
        double accb = 0.0;
        for (int s = s0; s < s1; ++s) {
          const double g = gout[static_cast<size_t>(s) * out + a];
          accb += g;
          const double* hs = h + static_cast<size_t>(s) * in;
          for (int c = in16; c < in; ++c) dwa[c] += g * hs[c];
        }
        if (db) db[a] += accb;
      }
    }
#else
#pragma omp parallel for schedule(static)
    for (int a = 0; a < out; ++a) {
      double* dwa = dw + static_cast<size_t>(a) * in;
      double accb = 0.0;
      for (int s = s0; s < s1; ++s) {
        const double g = gout[static_cast<size_t>(s) * out + a];
        accb += g;
        const double* hs = h + static_cast<size_t>(s) * in;
        for (int c = 0; c < in; ++c) dwa[c] += g * hs[c];
      }
      if (db) db[a] += accb;
    }
#endif
  }
}

void act_forward(Activation act, int n, const double* __restrict z, double* __restrict h) {
  switch (act) {
    case Activation::kTanh:
#if defined(KPINN_VEC_TANH)
#pragma omp parallel for schedule(static)
      for (int k0 = 0; k0 < (n + 4095) / 4096; ++k0) {
        const int b = k0 * 4096;
        tanh_forward_vec(std::min(4096, n - b), z + b, h + b);
      }
#else
#pragma omp parallel for simd schedule(static)
      for (int k = 0; k < n; ++k) h[k] = fast_tanh(z[k]);
#endif
      break;
    case Activation::kSin:
#pragma omp parallel for simd schedule(static)
      for (int k = 0; k < n; ++k) h[k] = std::sin(z[k]);
      break;
    case Activation::kRelu:
#pragma omp parallel for simd schedule(static)
      for (int k = 0; k < n; ++k) h[k] = z[k] > 0.0 ? z[k] : 0.0;
      break;
  }
}

void act_backward(Activation act, int n, const double* __restrict h,
                  const double* __restrict z, const double* __restrict g,
                  double* __restrict a) {
  switch (act) {
    case Activation::kTanh:
#pragma omp parallel for simd schedule(static)
      for (int k = 0; k < n; ++k) a[k] = g[k] * (1.0 - h[k] * h[k]);
      break;
    case Activation::kSin:
#pragma omp parallel for simd schedule(static)
      for (int k = 0; k < n; ++k) a[k] = g[k] * std::cos(z[k]);
      break;
    case Activation::kRelu:
#pragma omp parallel for simd schedule(static)
      for (int k = 0; k < n; ++k) a[k] = h[k] > 0.0 ? g[k] : 0.0;
      break;
  }
}

void dual_act_forward(Activation act, int n, const double* __restrict z,
                      const double* __restrict zth, const double* __restrict zt,
                      double* __restrict h, double* __restrict hth, double* __restrict ht) {
  switch (act) {
    case Activation::kTanh:
#if defined(KPINN_VEC_TANH)
#pragma omp parallel for schedule(static)
      for (int k0 = 0; k0 < (n + 4095) / 4096; ++k0) {
        const int b = k0 * 4096;
        tanh_dual_forward_vec(std::min(4096, n - b), z + b, zth + b, zt + b, h + b, hth + b,
                              ht + b);
      }
#else
#pragma omp parallel for simd schedule(static)
      for (int k = 0; k < n; ++k) {
        const double hk = fast_tanh(z[k]);
        const double d = 1.0 - hk * hk;
        h[k] = hk;
        hth[k] = d * zth[k];
        ht[k] = d * zt[k];
      }
#endif
      break;
    case Activation::kSin:
#pragma omp parallel for simd schedule(static)
      for (int k = 0; k < n; ++k) {
        const double d = std::cos(z[k]);
        h[k] = std::sin(z[k]);
        hth[k] = d * zth[k];
        ht[k] = d * zt[k];
      }
      break;
    case Activation::kRelu:
#pragma omp parallel for simd schedule(static)
      for (int k = 0; k < n; ++k) {
        const double d = z[k] > 0.0 ? 1.0 : 0.0;
        h[k] = z[k] > 0.0 ? z[k] : 0.0;
        hth[k] = d * zth[k];
        ht[k] = d * zt[k];
      }
      break;
  }
}

void dual_act_backward(Activation act, int n, const double* __restrict h,
                       const double* __restrict hth, const double* __restrict ht,
                       const double* __restrict z, const double* __restrict zth,
                       const double* __restrict zt, const double* __restrict gu,
                       const double* __restrict gth, const double* __restrict gt,
                       double* __restrict au, double* __restrict ath, double* __restrict at) {
  switch (act) {
    case Activation::kTanh:
      // sigma'' * zth = -2h * (sigma' * zth) = -2h * hth, so the stored
      // h-streams suffice even where sigma' underflows to zero
#pragma omp parallel for simd schedule(static)
      for (int k = 0; k < n; ++k) {
        const double hk = h[k];
        const double d = 1.0 - hk * hk;
        au[k] = gu[k] * d - 2.0 * hk * (gth[k] * hth[k] + gt[k] * ht[k]);
        ath[k] = gth[k] * d;
        at[k] = gt[k] * d;
      }
      break;
    case Activation::kSin:
#pragma omp parallel for simd schedule(static)
      for (int k = 0; k < n; ++k) {
        const double d = std::cos(z[k]);
        au[k] = gu[k] * d - h[k] * (gth[k] * zth[k] + gt[k] * zt[k]);
        ath[k] = gth[k] * d;
        at[k] = gt[k] * d;
      }
      break;
    case Activation::kRelu:
#pragma omp parallel for simd schedule(static)
      for (int k = 0; k < n; ++k) {
        const double d = h[k] > 0.0 ? 1.0 : 0.0;
        au[k] = gu[k] * d;
        ath[k] = gth[k] * d;
        at[k] = gt[k] * d;
      }
      break;
  }
}

void transpose(int rows, int cols, const double* a, double* at) {
  constexpr int kB = 32;
  for (int r0 = 0; r0 < rows; r0 += kB)
    for (int c0 = 0; c0 < cols; c0 += kB) {
      const int r1 = std::min(rows, r0 + kB);
      const int c1 = std::min(cols, c0 + kB);
      for (int r = r0; r < r1; ++r)
        for (int c = c0; c < c1; ++c)
          at[static_cast<size_t>(c) * rows + r] = a[static_cast<size_t>(r) * cols + c];
    }
}

double dot(int n, const double* a, const double* b) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

}  // namespace kpinn::kern
