// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma
// and only reached after a runtime CPU check.

#include "qclab/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#define QCLAB_HAVE_AVX2 1
#endif

namespace qclab::kernels {

#ifdef QCLAB_HAVE_AVX2
namespace {

// A __m256d holds two complex numbers [re0, im0, re1, im1].

inline __m256d swap_ri(__m256d v) { return _mm256_permute_pd(v, 0b0101); }

/// (cr + i ci) * v, coefficients given per lane ([cr0,cr0,cr1,cr1] etc).
inline __m256d cmul(__m256d cr, __m256d ci, __m256d v) {
  return _mm256_fmaddsub_pd(cr, v, _mm256_mul_pd(ci, swap_ri(v)));
}

/// x * conj(y), lane-wise.
inline __m256d cmul_conj(__m256d x, __m256d y) {
  const __m256d yr = _mm256_movedup_pd(y);
  const __m256d yi = _mm256_permute_pd(y, 0b1111);
  return _mm256_fmsubadd_pd(x, yr, _mm256_mul_pd(swap_ri(x), yi));
}

inline cplx hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return {_mm_cvtsd_f64(s), _mm_cvtsd_f64(_mm_unpackhi_pd(s, s))};
}

inline cplx lane(__m256d v, int k) {
  alignas(32) double buf[4];
  _mm256_store_pd(buf, v);
  return {buf[2 * k], buf[2 * k + 1]};
}

struct Coeffs {
  __m256d r00, i00, r01, i01, r10, i10, r11, i11;
  explicit Coeffs(const Mat2& m)
      : r00(_mm256_set1_pd(m.m00.real())), i00(_mm256_set1_pd(m.m00.imag())),
        r01(_mm256_set1_pd(m.m01.real())), i01(_mm256_set1_pd(m.m01.imag())),
        r10(_mm256_set1_pd(m.m10.real())), i10(_mm256_set1_pd(m.m10.imag())),
        r11(_mm256_set1_pd(m.m11.real())), i11(_mm256_set1_pd(m.m11.imag())) {}
};

// Coefficients for the qubit-0 layout, where one register holds [a, b].
struct PackedCoeffs {
  __m256d ar, ai, br, bi;  // rows: lane0 gets m00/m01, lane1 gets m10/m11
  explicit PackedCoeffs(const Mat2& m)
      : ar(_mm256_setr_pd(m.m00.real(), m.m00.real(), m.m10.real(), m.m10.real())),
        ai(_mm256_setr_pd(m.m00.imag(), m.m00.imag(), m.m10.imag(), m.m10.imag())),
        br(_mm256_setr_pd(m.m01.real(), m.m01.real(), m.m11.real(), m.m11.real())),
        bi(_mm256_setr_pd(m.m01.imag(), m.m01.imag(), m.m11.imag(), m.m11.imag())) {}
};

inline __m256d packed_apply(__m256d v, const PackedCoeffs& c) {
  const __m256d aa = _mm256_permute2f128_pd(v, v, 0x00);
  const __m256d bb = _mm256_permute2f128_pd(v, v, 0x11);
  return _mm256_add_pd(cmul(c.ar, c.ai, aa), cmul(c.br, c.bi, bb));
}

inline void pair_apply(double* pa, double* pb, const Coeffs& c) {
  const __m256d a = _mm256_loadu_pd(pa);
  const __m256d b = _mm256_loadu_pd(pb);
  const __m256d na = _mm256_add_pd(cmul(c.r00, c.i00, a), cmul(c.r01, c.i01, b));
  const __m256d nb = _mm256_add_pd(cmul(c.r10, c.i10, a), cmul(c.r11, c.i11, b));
  _mm256_storeu_pd(pa, na);
  _mm256_storeu_pd(pb, nb);
}

inline double* raw(cplx* p) { return reinterpret_cast<double*>(p); }
inline const double* raw(const cplx* p) { return reinterpret_cast<const double*>(p); }

void apply_1q(cplx* amps, std::size_t dim, unsigned qubit, const Mat2& m) {
  if (dim < 4) {
    scalar_table().apply_1q(amps, dim, qubit, m);
    return;
  }
  if (qubit == 0) {
    const PackedCoeffs c(m);
    for (std::size_t i = 0; i < dim; i += 2) {
      _mm256_storeu_pd(raw(amps + i), packed_apply(_mm256_loadu_pd(raw(amps + i)), c));
    }
    return;
  }
  const Coeffs c(m);
  const std::size_t stride = std::size_t{1} << qubit;
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; i += 2) {
      pair_apply(raw(amps + i), raw(amps + i + stride), c);
    }
  }
}

void apply_controlled_1q(cplx* amps, std::size_t dim, unsigned control, unsigned target,
                         const Mat2& m) {
  if (control == 0 || target == 0 || dim < 4) {
    scalar_table().apply_controlled_1q(amps, dim, control, target, m);
    return;
  }
  const Coeffs c(m);
  const std::size_t stride = std::size_t{1} << target;
  const std::size_t cmask = std::size_t{1} << control;
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; i += 2) {
      if ((i & cmask) == 0) continue;
      pair_apply(raw(amps + i), raw(amps + i + stride), c);
    }
  }
}

void apply_cnot(cplx* amps, std::size_t dim, unsigned control, unsigned target) {
  if (control == 0 || target == 0 || dim < 4) {
    scalar_table().apply_cnot(amps, dim, control, target);
    return;
  }
  const std::size_t tmask = std::size_t{1} << target;
  const std::size_t cmask = std::size_t{1} << control;
  for (std::size_t i = 0; i < dim; i += 2) {
    if ((i & cmask) == 0 || (i & tmask) != 0) continue;
    double* pa = raw(amps + i);
    double* pb = raw(amps + (i | tmask));
    const __m256d a = _mm256_loadu_pd(pa);
    const __m256d b = _mm256_loadu_pd(pb);
    _mm256_storeu_pd(pa, b);
    _mm256_storeu_pd(pb, a);
  }
}

struct CrossAcc {
  __m256d r00 = _mm256_setzero_pd();
  __m256d r01 = _mm256_setzero_pd();
  __m256d r10 = _mm256_setzero_pd();
  __m256d r11 = _mm256_setzero_pd();
};

inline void adjoint_step(double* pa, double* pb, double* pla, double* plb, const Coeffs& c,
                         CrossAcc& acc) {
  const __m256d a = _mm256_loadu_pd(pa);
  const __m256d b = _mm256_loadu_pd(pb);
  const __m256d la = _mm256_loadu_pd(pla);
  const __m256d lb = _mm256_loadu_pd(plb);
  acc.r00 = _mm256_add_pd(acc.r00, cmul_conj(a, la));
  acc.r01 = _mm256_add_pd(acc.r01, cmul_conj(a, lb));
  acc.r10 = _mm256_add_pd(acc.r10, cmul_conj(b, la));
  acc.r11 = _mm256_add_pd(acc.r11, cmul_conj(b, lb));
  _mm256_storeu_pd(pa, _mm256_add_pd(cmul(c.r00, c.i00, a), cmul(c.r01, c.i01, b)));
  _mm256_storeu_pd(pb, _mm256_add_pd(cmul(c.r10, c.i10, a), cmul(c.r11, c.i11, b)));
  _mm256_storeu_pd(pla, _mm256_add_pd(cmul(c.r00, c.i00, la), cmul(c.r01, c.i01, lb)));
  _mm256_storeu_pd(plb, _mm256_add_pd(cmul(c.r10, c.i10, la), cmul(c.r11, c.i11, lb)));
}

void adjoint_1q(cplx* psi, cplx* lambda, std::size_t dim, unsigned qubit, const Mat2& m,
                Mat2& cross) {
  if (dim < 4) {
    scalar_table().adjoint_1q(psi, lambda, dim, qubit, m, cross);
    return;
  }
  if (qubit == 0) {
    // v = [a, b], l = [la, lb]: v*conj(l) gives [R00, R11], v*conj(swap(l))
    // gives [R01, R10].
    const PackedCoeffs c(m);
    __m256d diag = _mm256_setzero_pd();
    __m256d off = _mm256_setzero_pd();
    for (std::size_t i = 0; i < dim; i += 2) {
      const __m256d v = _mm256_loadu_pd(raw(psi + i));
      const __m256d l = _mm256_loadu_pd(raw(lambda + i));
      diag = _mm256_add_pd(diag, cmul_conj(v, l));
      off = _mm256_add_pd(off, cmul_conj(v, _mm256_permute2f128_pd(l, l, 0x01)));
      _mm256_storeu_pd(raw(psi + i), packed_apply(v, c));
      _mm256_storeu_pd(raw(lambda + i), packed_apply(l, c));
    }
    cross = {lane(diag, 0), lane(off, 0), lane(off, 1), lane(diag, 1)};
    return;
  }
  const Coeffs c(m);
  CrossAcc acc;
  const std::size_t stride = std::size_t{1} << qubit;
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; i += 2) {
      adjoint_step(raw(psi + i), raw(psi + i + stride), raw(lambda + i),
                   raw(lambda + i + stride), c, acc);
    }
  }
  cross = {hsum(acc.r00), hsum(acc.r01), hsum(acc.r10), hsum(acc.r11)};
}

void adjoint_controlled_1q(cplx* psi, cplx* lambda, std::size_t dim, unsigned control,
                           unsigned target, const Mat2& m, Mat2& cross) {
  if (control == 0 || target == 0 || dim < 4) {
    scalar_table().adjoint_controlled_1q(psi, lambda, dim, control, target, m, cross);
    return;
  }
  const Coeffs c(m);
  CrossAcc acc;
  const std::size_t stride = std::size_t{1} << target;
  const std::size_t cmask = std::size_t{1} << control;
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; i += 2) {
      if ((i & cmask) == 0) continue;
      adjoint_step(raw(psi + i), raw(psi + i + stride), raw(lambda + i),
                   raw(lambda + i + stride), c, acc);
    }
  }
  cross = {hsum(acc.r00), hsum(acc.r01), hsum(acc.r10), hsum(acc.r11)};
}

double prob_one(const cplx* amps, std::size_t dim, unsigned qubit) {
  if (dim < 4) return scalar_table().prob_one(amps, dim, qubit);
  __m256d acc = _mm256_setzero_pd();
  if (qubit == 0) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_setr_epi64x(0, 0, -1, -1));
    for (std::size_t i = 0; i < dim; i += 2) {
      const __m256d v = _mm256_and_pd(_mm256_loadu_pd(raw(amps + i)), mask);
      acc = _mm256_fmadd_pd(v, v, acc);
    }
  } else {
    const std::size_t stride = std::size_t{1} << qubit;
    for (std::size_t base = stride; base < dim; base += 2 * stride) {
      for (std::size_t i = base; i < base + stride; i += 2) {
        const __m256d v = _mm256_loadu_pd(raw(amps + i));
        acc = _mm256_fmadd_pd(v, v, acc);
      }
    }
  }
  const cplx s = hsum(acc);
  return s.real() + s.imag();
}

cplx inner(const cplx* a, const cplx* b, std::size_t dim) {
  if (dim < 2) return scalar_table().inner(a, b, dim);
  // conj(a) * b == conj(conj(b) * a)
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < dim; i += 2) {
    acc = _mm256_add_pd(acc, cmul_conj(_mm256_loadu_pd(raw(b + i)), _mm256_loadu_pd(raw(a + i))));
  }
  return hsum(acc);
}

double norm_sq(const cplx* amps, std::size_t dim) {
  if (dim < 2) return scalar_table().norm_sq(amps, dim);
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < dim; i += 2) {
    const __m256d v = _mm256_loadu_pd(raw(amps + i));
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  const cplx s = hsum(acc);
  return s.real() + s.imag();
}

}  // namespace

const KernelTable* avx2_table() {
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  static const KernelTable table{
      "avx2",   apply_1q, apply_controlled_1q, apply_cnot, adjoint_1q, adjoint_controlled_1q,
      prob_one, inner,    norm_sq,
  };
  return supported ? &table : nullptr;
}

#else

const KernelTable* avx2_table() { return nullptr; }

#endif

}  // namespace qclab::kernels
