#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gapcore/kernels.hpp"
#include "gapcore/rng.hpp"

#include <cmath>
#include <cstring>
#include <vector>

using namespace gapcore;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo = -10.0, double hi = 10.0) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

} // namespace

TEST_CASE("scalar kernels match plain loops") {
    Rng rng(7);
    auto a = random_vec(rng, 37);
    auto b = random_vec(rng, 37);
    const auto& k = scalar_kernels();

    double dot = 0.0, supd = 0.0, maxv = a[0];
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        supd = std::max(supd, std::fabs(a[i] - b[i]));
        maxv = std::max(maxv, a[i]);
    }
    CHECK(k.dot(a.data(), b.data(), a.size()) == doctest::Approx(dot).epsilon(1e-14));
    CHECK(k.max_value(a.data(), a.size()) == maxv);
    CHECK(k.max_abs_diff(a.data(), b.data(), a.size()) == supd);
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
    if (!avx2_supported()) {
        MESSAGE("AVX2 not available; skipping equivalence checks");
        return;
    }
    const auto& s = scalar_kernels();
    const auto& v = avx2_kernels();
    Rng rng(123);

    // Sizes around the vector width boundaries plus larger blocks.
    for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 64u, 1001u}) {
        auto a = random_vec(rng, n);
        auto b = random_vec(rng, n);
        CAPTURE(n);

        // Reductions over max are order-insensitive: bit-exact.
        CHECK(s.max_value(a.data(), n) == v.max_value(a.data(), n));
        CHECK(s.max_abs_diff(a.data(), b.data(), n) == v.max_abs_diff(a.data(), b.data(), n));

        // dot reassociates across lanes; allow a few ulp.
        double ds = s.dot(a.data(), b.data(), n);
        double dv = v.dot(a.data(), b.data(), n);
        CHECK(std::fabs(ds - dv) <= 1e-12 * (1.0 + std::fabs(ds)));

        // Elementwise kernels apply identical rounding sequences: bit-exact.
        std::vector<double> out_s(n), out_v(n);
        s.elem_max(a.data(), b.data(), out_s.data(), n);
        v.elem_max(a.data(), b.data(), out_v.data(), n);
        CHECK(std::memcmp(out_s.data(), out_v.data(), n * sizeof(double)) == 0);

        s.elem_min(a.data(), b.data(), out_s.data(), n);
        v.elem_min(a.data(), b.data(), out_v.data(), n);
        CHECK(std::memcmp(out_s.data(), out_v.data(), n * sizeof(double)) == 0);

        s.axpby(0.3, a.data(), 0.7, b.data(), out_s.data(), n);
        v.axpby(0.3, a.data(), 0.7, b.data(), out_v.data(), n);
        CHECK(std::memcmp(out_s.data(), out_v.data(), n * sizeof(double)) == 0);

        auto acc_s = random_vec(rng, n);
        auto acc_v = acc_s;
        s.axpy_acc(1.7, a.data(), acc_s.data(), n);
        v.axpy_acc(1.7, a.data(), acc_v.data(), n);
        CHECK(std::memcmp(acc_s.data(), acc_v.data(), n * sizeof(double)) == 0);

        auto t = random_vec(rng, n);
        s.gap_penalty(t.data(), a.data(), b.data(), 0.42, out_s.data(), n);
        v.gap_penalty(t.data(), a.data(), b.data(), 0.42, out_v.data(), n);
        CHECK(std::memcmp(out_s.data(), out_v.data(), n * sizeof(double)) == 0);
    }
}

TEST_CASE("active kernel set is one of the known implementations") {
    const auto& k = kernels();
    bool known = std::strcmp(k.name, "scalar") == 0 || std::strcmp(k.name, "avx2") == 0;
    CHECK(known);
    if (avx2_supported() && std::getenv("GAPCORE_KERNELS") == nullptr)
        CHECK(std::strcmp(k.name, "avx2") == 0);
}

TEST_CASE("axpby with a = 0, b = 1 copies exactly") {
    // averaged value iteration relies on this to reduce to the plain sweep
    // at eta = 1
    Rng rng(5);
    auto x = random_vec(rng, 33);
    auto y = random_vec(rng, 33);
    std::vector<double> out(33);
    kernels().axpby(0.0, x.data(), 1.0, y.data(), out.data(), 33);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == y[i]);
}
