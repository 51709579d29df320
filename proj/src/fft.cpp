#include "dannasep/fft.hpp"

#include "dannasep/error.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

namespace dannasep {

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) noexcept {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

FftPlan::FftPlan(std::size_t size) : size_(size) {
    if (!is_power_of_two(size)) {
        fail(ErrorCode::InvalidConfig, "FFT size must be a power of two, got " + std::to_string(size));
    }
    std::size_t log2n = 0;
    while ((std::size_t{1} << log2n) < size) ++log2n;

    bit_reverse_.resize(size);
    for (std::size_t i = 0; i < size; ++i) {
        std::size_t r = 0;
        for (std::size_t b = 0; b < log2n; ++b) r |= ((i >> b) & 1u) << (log2n - 1 - b);
        bit_reverse_[i] = r;
    }

    twiddles_.resize(size / 2);
    for (std::size_t k = 0; k < size / 2; ++k) {
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(size);
        twiddles_[k] = {std::cos(angle), std::sin(angle)};
    }
}

void FftPlan::forward(std::span<Complex> data) const { transform(data, false); }

void FftPlan::inverse(std::span<Complex> data) const {
    transform(data, true);
    const double scale = 1.0 / static_cast<double>(size_);
    for (auto& z : data) z *= scale;
}

void FftPlan::transform(std::span<Complex> data, bool inverse) const {
    if (data.size() != size_) {
        fail(ErrorCode::ShapeMismatch,
             "FFT plan of size " + std::to_string(size_) + " applied to " + std::to_string(data.size()) + " points");
    }
    for (std::size_t i = 0; i < size_; ++i) {
        const std::size_t j = bit_reverse_[i];
        if (i < j) std::swap(data[i], data[j]);
    }
    for (std::size_t len = 2; len <= size_; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t stride = size_ / len;
        for (std::size_t start = 0; start < size_; start += len) {
            for (std::size_t k = 0; k < half; ++k) {
                Complex w = twiddles_[k * stride];
                if (inverse) w = std::conj(w);
                const Complex a = data[start + k];
                const Complex b = data[start + k + half];
                // Explicit real arithmetic: std::complex operator* carries
                // NaN-recovery branches we do not need.
                const Complex t{w.real() * b.real() - w.imag() * b.imag(),
                                w.real() * b.imag() + w.imag() * b.real()};
                data[start + k] = a + t;
                data[start + k + half] = a - t;
            }
        }
    }
}

}  // namespace dannasep
