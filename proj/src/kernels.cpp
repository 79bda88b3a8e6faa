#include "gapcore/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

namespace gapcore {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double max_value_scalar(const double* a, std::size_t n) {
    double m = a[0];
    for (std::size_t i = 1; i < n; ++i)
        if (a[i] > m) m = a[i];
    return m;
}

double max_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = std::fabs(a[i] - b[i]);
        if (d > m) m = d;
    }
    return m;
}

void elem_max_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] > b[i] ? a[i] : b[i];
}

void elem_min_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] < b[i] ? a[i] : b[i];
}

void axpby_scalar(double a, const double* x, double b, const double* y, double* out,
                  std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void axpy_acc_scalar(double a, const double* x, double* acc, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) acc[i] += a * x[i];
}

void gap_penalty_scalar(const double* t, const double* q, const double* v, double alpha,
                        double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = t[i] - alpha * (v[i] - q[i]);
}

const KernelSet g_scalar = {
    "scalar",        dot_scalar,      max_value_scalar, max_abs_diff_scalar,
    elem_max_scalar, elem_min_scalar, axpby_scalar,     axpy_acc_scalar,
    gap_penalty_scalar,
};

const KernelSet& select_kernels() {
    if (const char* env = std::getenv("GAPCORE_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return scalar_kernels();
        if (std::strcmp(env, "avx2") == 0 && avx2_supported()) return avx2_kernels();
    }
    if (avx2_supported()) return avx2_kernels();
    return scalar_kernels();
}

} // namespace

const KernelSet& scalar_kernels() { return g_scalar; }

const KernelSet& kernels() {
    static const KernelSet& active = select_kernels();
    return active;
}

} // namespace gapcore
