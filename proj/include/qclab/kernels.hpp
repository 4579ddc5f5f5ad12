#pragma once

// Statevector inner-loop kernels.
//
// Every kernel exists as a portable scalar reference and, on x86-64, an
// AVX2+FMA variant. The active table is picked once at first use from the
// CPU feature bits; QCLAB_KERNELS=scalar forces the reference path.
//
// Amplitudes are interleaved complex doubles, qubit 0 is the least
// significant bit of the basis index.

#include <complex>
#include <cstddef>
#include <string_view>

namespace qclab::kernels {

using cplx = std::complex<double>;

/// Row-major 2x2 complex matrix.
struct Mat2 {
  cplx m00, m01, m10, m11;
};

struct KernelTable {
  std::string_view name;

  /// amps <- (I ⊗ m ⊗ I) amps, with m acting on `qubit`.
  void (*apply_1q)(cplx* amps, std::size_t dim, unsigned qubit, const Mat2& m);

  /// Same, restricted to the subspace where `control` is set.
  void (*apply_controlled_1q)(cplx* amps, std::size_t dim, unsigned control, unsigned target,
                              const Mat2& m);

  void (*apply_cnot)(cplx* amps, std::size_t dim, unsigned control, unsigned target);

  // Fused reverse-sweep step for a single-qubit block. Accumulates the cross
  // matrix R = sum over amplitude pairs of psi_pair * lambda_pair^H (so
  // <lambda|M|psi> = Tr(M R) for any 2x2 M on `qubit`), then applies `m`
  // (normally the block's inverse) to both vectors.
  void (*adjoint_1q)(cplx* psi, cplx* lambda, std::size_t dim, unsigned qubit, const Mat2& m,
                     Mat2& cross);

  void (*adjoint_controlled_1q)(cplx* psi, cplx* lambda, std::size_t dim, unsigned control,
                                unsigned target, const Mat2& m, Mat2& cross);

  /// Sum of |amp|^2 over basis states whose bit `qubit` is 1.
  double (*prob_one)(const cplx* amps, std::size_t dim, unsigned qubit);

  /// sum_i conj(a_i) b_i
  cplx (*inner)(const cplx* a, const cplx* b, std::size_t dim);

  double (*norm_sq)(const cplx* amps, std::size_t dim);
};

const KernelTable& scalar_table();

/// nullptr when the binary or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();

/// The table used by the rest of the library.
const KernelTable& active();

}  // namespace qclab::kernels
