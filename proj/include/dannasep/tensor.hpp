#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace dannasep {

using Complex = std::complex<double>;

struct Shape3 {
    std::size_t channels = 0;
    std::size_t frames = 0;
    std::size_t bins = 0;

    std::size_t size() const noexcept { return channels * frames * bins; }
    friend bool operator==(const Shape3&, const Shape3&) = default;
};

/// Dense channels x frames x bins tensor, bins fastest.
template <class T>
class Tensor3 {
public:
    Tensor3() = default;
    explicit Tensor3(Shape3 shape, T fill = T{}) : shape_(shape), data_(shape.size(), fill) {}

    const Shape3& shape() const noexcept { return shape_; }
    std::size_t channels() const noexcept { return shape_.channels; }
    std::size_t frames() const noexcept { return shape_.frames; }
    std::size_t bins() const noexcept { return shape_.bins; }
    std::size_t size() const noexcept { return data_.size(); }

    T& operator()(std::size_t c, std::size_t t, std::size_t f) noexcept {
        return data_[(c * shape_.frames + t) * shape_.bins + f];
    }
    const T& operator()(std::size_t c, std::size_t t, std::size_t f) const noexcept {
        return data_[(c * shape_.frames + t) * shape_.bins + f];
    }

    std::span<T> frame(std::size_t c, std::size_t t) noexcept {
        return {data_.data() + (c * shape_.frames + t) * shape_.bins, shape_.bins};
    }
    std::span<const T> frame(std::size_t c, std::size_t t) const noexcept {
        return {data_.data() + (c * shape_.frames + t) * shape_.bins, shape_.bins};
    }

    std::span<T> data() noexcept { return data_; }
    std::span<const T> data() const noexcept { return data_; }

    friend bool operator==(const Tensor3&, const Tensor3&) = default;

private:
    Shape3 shape_{};
    std::vector<T> data_;
};

using RealTensor = Tensor3<double>;
using ComplexTensor = Tensor3<Complex>;

}  // namespace dannasep
