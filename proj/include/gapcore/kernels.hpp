#pragma once

#include <cstddef>

namespace gapcore {

/// Flat-array arithmetic kernels behind the operator and solver inner loops.
///
/// Two implementations exist: a scalar reference and an AVX2 variant, picked
/// once per process at first use (see kernels()). Every kernel except `dot`
/// applies the same per-element rounding sequence in both variants and is
/// therefore bit-identical between them; `dot` reassociates the accumulation
/// across SIMD lanes and may differ from the scalar sum by a few ulp. The
/// equivalence tests pin both contracts down.
struct KernelSet {
    const char* name;

    /// Inner product sum_i a[i]*b[i].
    double (*dot)(const double* a, const double* b, std::size_t n);

    /// Maximum element; n must be >= 1.
    double (*max_value)(const double* a, std::size_t n);

    /// max_i |a[i] - b[i]|; returns 0 for n == 0.
    double (*max_abs_diff)(const double* a, const double* b, std::size_t n);

    /// out[i] = max(a[i], b[i]).
    void (*elem_max)(const double* a, const double* b, double* out, std::size_t n);

    /// out[i] = min(a[i], b[i]).
    void (*elem_min)(const double* a, const double* b, double* out, std::size_t n);

    /// out[i] = a*x[i] + b*y[i]. Aliasing with x or y is allowed.
    void (*axpby)(double a, const double* x, double b, const double* y, double* out,
                  std::size_t n);

    /// acc[i] += a*x[i].
    void (*axpy_acc)(double a, const double* x, double* acc, std::size_t n);

    /// out[i] = t[i] - alpha*(v[i] - q[i]); the advantage-learning penalty.
    void (*gap_penalty)(const double* t, const double* q, const double* v,
                        double alpha, double* out, std::size_t n);
};

const KernelSet& scalar_kernels();

bool avx2_supported();
const KernelSet& avx2_kernels(); // valid to call only when avx2_supported()

/// Active kernel set. Selection order: the GAPCORE_KERNELS environment
/// variable ("scalar" or "avx2") if set, otherwise AVX2 when the CPU has it,
/// otherwise scalar. The choice is made once and cached.
const KernelSet& kernels();

} // namespace gapcore
