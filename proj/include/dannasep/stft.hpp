#pragma once

#include "dannasep/tensor.hpp"
#include "dannasep/waveform.hpp"

#include <cstddef>
#include <vector>

namespace dannasep {

enum class WindowKind { hann };

struct StftConfig {
    std::size_t fft_size = 4096;
    std::size_t hop = 1024;
    WindowKind window = WindowKind::hann;
    bool center_pad = true;

    /// Throws InvalidConfig unless fft_size is a power of two, 0 < hop <=
    /// fft_size, and the window/hop pair is constant-overlap-add.
    void validate() const;

    std::size_t bins() const noexcept { return fft_size / 2 + 1; }
    std::size_t frames_for(std::size_t length) const noexcept;

    friend bool operator==(const StftConfig&, const StftConfig&) = default;
};

/// One-sided complex spectrogram, channels x frames x (fft_size/2 + 1).
struct Spectrogram {
    ComplexTensor bins;
    StftConfig config;
    int sample_rate = 0;
};

/// Periodic Hann window of length n (peak 1.0 at n/2).
std::vector<double> hann_window(std::size_t n);

Spectrogram stft(const Waveform& w, const StftConfig& cfg);

/// Weighted overlap-add inverse normalized by the summed squared window.
Waveform istft(const Spectrogram& s, const StftConfig& cfg, std::size_t length);

/// Largest length istft can reconstruct from `frames` frames.
std::size_t reconstructable_length(std::size_t frames, const StftConfig& cfg) noexcept;

RealTensor magnitude(const Spectrogram& s);
RealTensor magnitude(const ComplexTensor& bins);

}  // namespace dannasep
