#include "dannasep/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace k = dannasep::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> dist(0.0, 3.0);
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

// Sizes straddle the 4-lane block boundary and the 16-element unroll.
constexpr std::size_t kSizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 15, 16, 17, 31, 64, 1023, 4097};

}  // namespace

TEST_CASE("scalar reductions agree with naive loops") {
    std::mt19937_64 rng(11);
    for (std::size_t n : kSizes) {
        const auto a = random_vec(rng, n);
        const auto b = random_vec(rng, n);
        double dot = 0.0, sq = 0.0, ab = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            dot += a[i] * b[i];
            sq += (a[i] - b[i]) * (a[i] - b[i]);
            ab += std::fabs(a[i] - b[i]);
        }
        CHECK(k::scalar::dot(a.data(), b.data(), n) == doctest::Approx(dot).epsilon(1e-12));
        CHECK(k::scalar::sum_sq_diff(a.data(), b.data(), n) == doctest::Approx(sq).epsilon(1e-12));
        CHECK(k::scalar::sum_abs_diff(a.data(), b.data(), n) == doctest::Approx(ab).epsilon(1e-12));
    }
}

#if defined(DANNASEP_HAVE_AVX2_KERNELS)

TEST_CASE("avx2 reductions match scalar within reassociation error") {
    if (!k::isa_available(k::Isa::avx2)) return;
    std::mt19937_64 rng(12);
    for (std::size_t n : kSizes) {
        const auto a = random_vec(rng, n);
        const auto b = random_vec(rng, n);
        double scale = 1.0;
        for (std::size_t i = 0; i < n; ++i) scale += std::fabs(a[i] * b[i]) + (a[i] - b[i]) * (a[i] - b[i]);
        const double tol = 1e-14 * scale;
        CHECK(std::fabs(k::avx2::dot(a.data(), b.data(), n) - k::scalar::dot(a.data(), b.data(), n)) <= tol);
        CHECK(std::fabs(k::avx2::sum_sq_diff(a.data(), b.data(), n) - k::scalar::sum_sq_diff(a.data(), b.data(), n)) <=
              tol);
        CHECK(std::fabs(k::avx2::sum_abs_diff(a.data(), b.data(), n) -
                        k::scalar::sum_abs_diff(a.data(), b.data(), n)) <= tol);
    }
}

TEST_CASE("avx2 elementwise kernels are bit-identical to scalar") {
    if (!k::isa_available(k::Isa::avx2)) return;
    std::mt19937_64 rng(13);
    for (std::size_t n : kSizes) {
        const auto a = random_vec(rng, n);
        const auto b = random_vec(rng, n);
        const auto y0 = random_vec(rng, n);

        auto ys = y0, yv = y0;
        k::scalar::axpy(-0.37, a.data(), ys.data(), n);
        k::avx2::axpy(-0.37, a.data(), yv.data(), n);
        CHECK(ys == yv);

        ys = y0;
        yv = y0;
        k::scalar::mul_acc(a.data(), b.data(), ys.data(), n);
        k::avx2::mul_acc(a.data(), b.data(), yv.data(), n);
        CHECK(ys == yv);

        std::vector<double> z = random_vec(rng, 2 * n);
        std::vector<double> ms(n), mv(n);
        k::scalar::complex_abs(z.data(), ms.data(), n);
        k::avx2::complex_abs(z.data(), mv.data(), n);
        CHECK(ms == mv);
    }
}

#endif

TEST_CASE("dispatch can be pinned and restored") {
    CHECK(k::force_isa(k::Isa::scalar));
    CHECK(k::active_isa() == k::Isa::scalar);
    const std::vector<double> a = {1.0, 2.0, 3.0};
    const std::vector<double> b = {4.0, -5.0, 6.0};
    CHECK(k::dot(a, b) == 12.0);
    std::vector<std::complex<double>> z = {{3.0, 4.0}, {0.0, -2.0}};
    std::vector<double> m(2);
    k::complex_abs(z, m);
    CHECK(m[0] == 5.0);
    CHECK(m[1] == 2.0);
    k::reset_isa();
    if (k::isa_available(k::Isa::avx2)) {
        CHECK(k::active_isa() == k::Isa::avx2);
    }
    CHECK(k::isa_name(k::Isa::scalar) == "scalar");
}
