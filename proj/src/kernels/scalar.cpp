#include "qclab/kernels.hpp"

namespace qclab::kernels {
namespace {

void apply_1q(cplx* amps, std::size_t dim, unsigned qubit, const Mat2& m) {
  const std::size_t stride = std::size_t{1} << qubit;
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) {
      const cplx a = amps[i];
      const cplx b = amps[i + stride];
      amps[i] = m.m00 * a + m.m01 * b;
      amps[i + stride] = m.m10 * a + m.m11 * b;
    }
  }
}

void apply_controlled_1q(cplx* amps, std::size_t dim, unsigned control, unsigned target,
                         const Mat2& m) {
  const std::size_t stride = std::size_t{1} << target;
  const std::size_t cmask = std::size_t{1} << control;
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) {
      if ((i & cmask) == 0) continue;
      const cplx a = amps[i];
      const cplx b = amps[i + stride];
      amps[i] = m.m00 * a + m.m01 * b;
      amps[i + stride] = m.m10 * a + m.m11 * b;
    }
  }
}

void apply_cnot(cplx* amps, std::size_t dim, unsigned control, unsigned target) {
  const std::size_t tmask = std::size_t{1} << target;
  const std::size_t cmask = std::size_t{1} << control;
  for (std::size_t i = 0; i < dim; ++i) {
    if ((i & cmask) != 0 && (i & tmask) == 0) std::swap(amps[i], amps[i | tmask]);
  }
}

inline void adjoint_pair(cplx& a, cplx& b, cplx& la, cplx& lb, const Mat2& m, Mat2& r) {
  const cplx cla = std::conj(la);
  const cplx clb = std::conj(lb);
  r.m00 += a * cla;
  r.m01 += a * clb;
  r.m10 += b * cla;
  r.m11 += b * clb;
  const cplx na = m.m00 * a + m.m01 * b;
  const cplx nb = m.m10 * a + m.m11 * b;
  const cplx nla = m.m00 * la + m.m01 * lb;
  const cplx nlb = m.m10 * la + m.m11 * lb;
  a = na;
  b = nb;
  la = nla;
  lb = nlb;
}

void adjoint_1q(cplx* psi, cplx* lambda, std::size_t dim, unsigned qubit, const Mat2& m,
                Mat2& cross) {
  const std::size_t stride = std::size_t{1} << qubit;
  Mat2 r{};
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) {
      adjoint_pair(psi[i], psi[i + stride], lambda[i], lambda[i + stride], m, r);
    }
  }
  cross = r;
}

void adjoint_controlled_1q(cplx* psi, cplx* lambda, std::size_t dim, unsigned control,
                           unsigned target, const Mat2& m, Mat2& cross) {
  const std::size_t stride = std::size_t{1} << target;
  const std::size_t cmask = std::size_t{1} << control;
  Mat2 r{};
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) {
      if ((i & cmask) == 0) continue;
      adjoint_pair(psi[i], psi[i + stride], lambda[i], lambda[i + stride], m, r);
    }
  }
  cross = r;
}

double prob_one(const cplx* amps, std::size_t dim, unsigned qubit) {
  const std::size_t stride = std::size_t{1} << qubit;
  double acc = 0.0;
  for (std::size_t base = stride; base < dim; base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) acc += std::norm(amps[i]);
  }
  return acc;
}

cplx inner(const cplx* a, const cplx* b, std::size_t dim) {
  cplx acc{};
  for (std::size_t i = 0; i < dim; ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

double norm_sq(const cplx* amps, std::size_t dim) {
  double acc = 0.0;
  for (std::size_t i = 0; i < dim; ++i) acc += std::norm(amps[i]);
  return acc;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{
      "scalar",   apply_1q, apply_controlled_1q, apply_cnot, adjoint_1q, adjoint_controlled_1q,
      prob_one,   inner,    norm_sq,
  };
  return table;
}

}  // namespace qclab::kernels
