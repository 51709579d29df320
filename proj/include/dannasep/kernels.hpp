#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

// Hot inner loops shared by the signal-processing modules. Each kernel has a
// scalar reference implementation and an AVX2 variant; the variant is picked
// once at runtime from CPUID and can be pinned for testing.
//
// Elementwise kernels (axpy, mul_acc, complex_abs) are bit-identical across
// variants. Reductions (dot, sum_sq_diff, sum_abs_diff) use four independent
// lane accumulators in the AVX2 path and so differ from the sequential scalar
// sum by rounding only; both are deterministic for a fixed variant.

namespace dannasep::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;

/// True when the running CPU (and this build) can execute `isa`.
bool isa_available(Isa isa) noexcept;

/// Variant used by the dispatching entry points below.
Isa active_isa() noexcept;

/// Pins the dispatch. Returns false (and changes nothing) if unavailable.
bool force_isa(Isa isa) noexcept;

/// Restores CPUID-based selection.
void reset_isa() noexcept;

double dot(std::span<const double> a, std::span<const double> b);
double sum_sq_diff(std::span<const double> a, std::span<const double> b);
double sum_abs_diff(std::span<const double> a, std::span<const double> b);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// y += a * b (elementwise)
void mul_acc(std::span<const double> a, std::span<const double> b, std::span<double> y);
/// out[i] = sqrt(re^2 + im^2)
void complex_abs(std::span<const std::complex<double>> z, std::span<double> out);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n) noexcept;
double sum_sq_diff(const double* a, const double* b, std::size_t n) noexcept;
double sum_abs_diff(const double* a, const double* b, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
void mul_acc(const double* a, const double* b, double* y, std::size_t n) noexcept;
void complex_abs(const double* z, double* out, std::size_t n) noexcept;
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define DANNASEP_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n) noexcept;
double sum_sq_diff(const double* a, const double* b, std::size_t n) noexcept;
double sum_abs_diff(const double* a, const double* b, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
void mul_acc(const double* a, const double* b, double* y, std::size_t n) noexcept;
void complex_abs(const double* z, double* out, std::size_t n) noexcept;
}  // namespace avx2
#endif

}  // namespace dannasep::kernels
