#include "dannasep/kernels.hpp"

#if defined(DANNASEP_HAVE_AVX2_KERNELS)

#include <immintrin.h>

#include <cmath>

// Compiled with per-function target attributes so the rest of the library
// stays baseline x86-64. No FMA: products and sums are rounded separately,
// exactly as in the scalar reference.
#define DANNASEP_AVX2 __attribute__((target("avx2")))

namespace dannasep::kernels::avx2 {

namespace {

DANNASEP_AVX2 inline double horizontal_sum(__m256d v) noexcept {
    // Fixed order: (l0 + l1) + (l2 + l3).
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const double s01 = _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
    const double s23 = _mm_cvtsd_f64(hi) + _mm_cvtsd_f64(_mm_unpackhi_pd(hi, hi));
    return s01 + s23;
}

}  // namespace

DANNASEP_AVX2 double dot(const double* a, const double* b, std::size_t n) noexcept {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, prod);
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return horizontal_sum(acc) + tail;
}

DANNASEP_AVX2 double sum_sq_diff(const double* a, const double* b, std::size_t n) noexcept {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    double tail = 0.0;
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        tail += d * d;
    }
    return horizontal_sum(acc) + tail;
}

DANNASEP_AVX2 double sum_abs_diff(const double* a, const double* b, std::size_t n) noexcept {
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, d));
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += std::fabs(a[i] - b[i]);
    return horizontal_sum(acc) + tail;
}

DANNASEP_AVX2 void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

DANNASEP_AVX2 void mul_acc(const double* a, const double* b, double* y, std::size_t n) noexcept {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
    }
    for (; i < n; ++i) y[i] += a[i] * b[i];
}

DANNASEP_AVX2 void complex_abs(const double* z, double* out, std::size_t n) noexcept {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        // z0 = (re0 im0 re1 im1), z1 = (re2 im2 re3 im3)
        const __m256d z0 = _mm256_loadu_pd(z + 2 * i);
        const __m256d z1 = _mm256_loadu_pd(z + 2 * i + 4);
        const __m256d sq0 = _mm256_mul_pd(z0, z0);
        const __m256d sq1 = _mm256_mul_pd(z1, z1);
        // hadd -> (|z0|^2 |z2|^2 |z1|^2 |z3|^2); each lane is re*re + im*im.
        const __m256d h = _mm256_hadd_pd(sq0, sq1);
        const __m256d ordered = _mm256_permute4x64_pd(h, 0b11011000);
        _mm256_storeu_pd(out + i, _mm256_sqrt_pd(ordered));
    }
    for (; i < n; ++i) {
        const double re = z[2 * i];
        const double im = z[2 * i + 1];
        out[i] = std::sqrt(re * re + im * im);
    }
}

}  // namespace dannasep::kernels::avx2

#endif
