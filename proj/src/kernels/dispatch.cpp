#include "dannasep/error.hpp"
#include "dannasep/kernels.hpp"

#include <atomic>
#include <string>

namespace dannasep::kernels {

namespace {

Isa detect() noexcept {
#if defined(DANNASEP_HAVE_AVX2_KERNELS)
    if (__builtin_cpu_supports("avx2")) return Isa::avx2;
#endif
    return Isa::scalar;
}

std::atomic<Isa>& current() noexcept {
    static std::atomic<Isa> isa{detect()};
    return isa;
}

void require_same_size(std::size_t a, std::size_t b) {
    if (a != b) {
        fail(ErrorCode::ShapeMismatch,
             "kernel operands differ in length (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
    }
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

bool isa_available(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2:
#if defined(DANNASEP_HAVE_AVX2_KERNELS)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
    }
    return false;
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

bool force_isa(Isa isa) noexcept {
    if (!isa_available(isa)) return false;
    current().store(isa, std::memory_order_relaxed);
    return true;
}

void reset_isa() noexcept { current().store(detect(), std::memory_order_relaxed); }

#if defined(DANNASEP_HAVE_AVX2_KERNELS)
#define DANNASEP_DISPATCH(name, ...)                                   \
    (active_isa() == Isa::avx2 ? avx2::name(__VA_ARGS__) : scalar::name(__VA_ARGS__))
#else
#define DANNASEP_DISPATCH(name, ...) scalar::name(__VA_ARGS__)
#endif

double dot(std::span<const double> a, std::span<const double> b) {
    require_same_size(a.size(), b.size());
    return DANNASEP_DISPATCH(dot, a.data(), b.data(), a.size());
}

double sum_sq_diff(std::span<const double> a, std::span<const double> b) {
    require_same_size(a.size(), b.size());
    return DANNASEP_DISPATCH(sum_sq_diff, a.data(), b.data(), a.size());
}

double sum_abs_diff(std::span<const double> a, std::span<const double> b) {
    require_same_size(a.size(), b.size());
    return DANNASEP_DISPATCH(sum_abs_diff, a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    require_same_size(x.size(), y.size());
    DANNASEP_DISPATCH(axpy, alpha, x.data(), y.data(), x.size());
}

void mul_acc(std::span<const double> a, std::span<const double> b, std::span<double> y) {
    require_same_size(a.size(), b.size());
    require_same_size(a.size(), y.size());
    DANNASEP_DISPATCH(mul_acc, a.data(), b.data(), y.data(), a.size());
}

void complex_abs(std::span<const std::complex<double>> z, std::span<double> out) {
    require_same_size(z.size(), out.size());
    DANNASEP_DISPATCH(complex_abs, reinterpret_cast<const double*>(z.data()), out.data(), z.size());
}

}  // namespace dannasep::kernels
