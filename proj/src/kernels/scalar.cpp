#include "dannasep/kernels.hpp"

#include <cmath>

namespace dannasep::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

double sum_abs_diff(const double* a, const double* b, std::size_t n) noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]);
    return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void mul_acc(const double* a, const double* b, double* y, std::size_t n) noexcept {
    for (std::size_t i = 0; i < n; ++i) y[i] += a[i] * b[i];
}

void complex_abs(const double* z, double* out, std::size_t n) noexcept {
    for (std::size_t i = 0; i < n; ++i) {
        const double re = z[2 * i];
        const double im = z[2 * i + 1];
        out[i] = std::sqrt(re * re + im * im);
    }
}

}  // namespace dannasep::kernels::scalar
