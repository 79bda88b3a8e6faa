#include "gapcore/kernels.hpp"

#if defined(__x86_64__)

#include <immintrin.h>

namespace gapcore {

namespace {

// Tail elements are handled by the same scalar expressions the reference
// kernels use, so per-element results stay bit-identical (dot excepted).

double dot_avx2(const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    __m256d acc = _mm256_setzero_pd();
    for (; i + 4 <= n; i += 4) {
        __m256d va = _mm256_loadu_pd(a + i);
        __m256d vb = _mm256_loadu_pd(b + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
    }
    __m128d lo = _mm256_castpd256_pd128(acc);
    __m128d hi = _mm256_extractf128_pd(acc, 1);
    __m128d s2 = _mm_add_pd(lo, hi);
    double s = _mm_cvtsd_f64(s2) + _mm_cvtsd_f64(_mm_unpackhi_pd(s2, s2));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double max_value_avx2(const double* a, std::size_t n) {
    if (n < 4) {
        double m = a[0];
        for (std::size_t i = 1; i < n; ++i)
            if (a[i] > m) m = a[i];
        return m;
    }
    __m256d acc = _mm256_loadu_pd(a);
    std::size_t i = 4;
    for (; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(a + i));
    __m128d lo = _mm256_castpd256_pd128(acc);
    __m128d hi = _mm256_extractf128_pd(acc, 1);
    __m128d m2 = _mm_max_pd(lo, hi);
    double m = _mm_cvtsd_f64(_mm_max_sd(m2, _mm_unpackhi_pd(m2, m2)));
    for (; i < n; ++i)
        if (a[i] > m) m = a[i];
    return m;
}

double max_abs_diff_avx2(const double* a, const double* b, std::size_t n) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_max_pd(acc, _mm256_andnot_pd(sign, d));
    }
    __m128d lo = _mm256_castpd256_pd128(acc);
    __m128d hi = _mm256_extractf128_pd(acc, 1);
    __m128d m2 = _mm_max_pd(lo, hi);
    double m = _mm_cvtsd_f64(_mm_max_sd(m2, _mm_unpackhi_pd(m2, m2)));
    for (; i < n; ++i) {
        double d = a[i] - b[i];
        if (d < 0) d = -d;
        if (d > m) m = d;
    }
    return m;
}

void elem_max_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_max_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] > b[i] ? a[i] : b[i];
}

void elem_min_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_min_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] < b[i] ? a[i] : b[i];
}

void axpby_avx2(double a, const double* x, double b, const double* y, double* out,
                std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    const __m256d vb = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d t = _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(x + i)),
                                  _mm256_mul_pd(vb, _mm256_loadu_pd(y + i)));
        _mm256_storeu_pd(out + i, t);
    }
    for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void axpy_acc_avx2(double a, const double* x, double* acc, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d t = _mm256_add_pd(_mm256_loadu_pd(acc + i),
                                  _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(acc + i, t);
    }
    for (; i < n; ++i) acc[i] += a * x[i];
}

void gap_penalty_avx2(const double* t, const double* q, const double* v, double alpha,
                      double* out, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d gap = _mm256_sub_pd(_mm256_loadu_pd(v + i), _mm256_loadu_pd(q + i));
        _mm256_storeu_pd(out + i,
                         _mm256_sub_pd(_mm256_loadu_pd(t + i), _mm256_mul_pd(va, gap)));
    }
    for (; i < n; ++i) out[i] = t[i] - alpha * (v[i] - q[i]);
}

const KernelSet g_avx2 = {
    "avx2",        dot_avx2,      max_value_avx2, max_abs_diff_avx2,
    elem_max_avx2, elem_min_avx2, axpby_avx2,     axpy_acc_avx2,
    gap_penalty_avx2,
};

} // namespace

bool avx2_supported() { return __builtin_cpu_supports("avx2"); }

const KernelSet& avx2_kernels() { return g_avx2; }

} // namespace gapcore

#else // !__x86_64__

namespace gapcore {

bool avx2_supported() { return false; }

const KernelSet& avx2_kernels() { return scalar_kernels(); }

} // namespace gapcore

#endif
