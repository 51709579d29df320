#pragma once

#include "dannasep/tensor.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace dannasep {

/// In-place iterative radix-2 complex FFT for a fixed power-of-two size.
/// Plans are immutable after construction and safe to share across threads.
class FftPlan {
public:
    explicit FftPlan(std::size_t size);

    std::size_t size() const noexcept { return size_; }

    /// X[k] = sum_n x[n] e^{-2 pi i k n / N}
    void forward(std::span<Complex> data) const;
    /// x[n] = (1/N) sum_k X[k] e^{+2 pi i k n / N}
    void inverse(std::span<Complex> data) const;

private:
    void transform(std::span<Complex> data, bool inverse) const;

    std::size_t size_;
    std::vector<std::size_t> bit_reverse_;
    std::vector<Complex> twiddles_;  // e^{-2 pi i k / N}, k < N/2
};

bool is_power_of_two(std::size_t n) noexcept;
std::size_t next_power_of_two(std::size_t n) noexcept;

}  // namespace dannasep
