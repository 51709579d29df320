#include "dannasep/stft.hpp"

#include "dannasep/error.hpp"
#include "dannasep/fft.hpp"
#include "dannasep/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace dannasep {

void StftConfig::validate() const {
    if (!is_power_of_two(fft_size) || fft_size < 2) {
        fail(ErrorCode::InvalidConfig, "fft_size must be a power of two >= 2, got " + std::to_string(fft_size));
    }
    if (hop == 0 || hop > fft_size) {
        fail(ErrorCode::InvalidConfig, "hop must be in (0, fft_size], got " + std::to_string(hop));
    }
    const auto window = hann_window(fft_size);
    std::vector<double> overlap(hop, 0.0);
    for (std::size_t n = 0; n < fft_size; ++n) overlap[n % hop] += window[n];
    const auto [lo, hi] = std::minmax_element(overlap.begin(), overlap.end());
    if (*hi - *lo > 1e-10 * std::max(1.0, *hi)) {
        fail(ErrorCode::InvalidConfig, "hann window with fft_size " + std::to_string(fft_size) + " and hop " +
                                           std::to_string(hop) + " is not constant-overlap-add");
    }
}

std::size_t StftConfig::frames_for(std::size_t length) const noexcept {
    if (center_pad) return length / hop + 1;
    if (length <= fft_size) return 1;
    return 1 + (length - fft_size + hop - 1) / hop;
}

std::size_t reconstructable_length(std::size_t frames, const StftConfig& cfg) noexcept {
    if (frames == 0) return 0;
    const std::size_t span = (frames - 1) * cfg.hop + cfg.fft_size;
    const std::size_t pad = cfg.center_pad ? cfg.fft_size / 2 : 0;
    return span - pad;
}

std::vector<double> hann_window(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    }
    return w;
}

Spectrogram stft(const Waveform& w, const StftConfig& cfg) {
    cfg.validate();
    if (w.length() == 0) fail(ErrorCode::EmptySignal, "cannot transform an empty signal");

    const std::size_t n = cfg.fft_size;
    const std::size_t frames = cfg.frames_for(w.length());
    const auto pad = static_cast<std::ptrdiff_t>(cfg.center_pad ? n / 2 : 0);
    const auto window = hann_window(n);
    const FftPlan plan(n);

    Spectrogram out{ComplexTensor({w.channels(), frames, cfg.bins()}), cfg, w.sample_rate()};
    std::vector<Complex> buffer(n);
    const auto length = static_cast<std::ptrdiff_t>(w.length());

    for (std::size_t c = 0; c < w.channels(); ++c) {
        const auto x = w.channel(c);
        for (std::size_t t = 0; t < frames; ++t) {
            const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(t * cfg.hop) - pad;
            for (std::size_t i = 0; i < n; ++i) {
                const std::ptrdiff_t idx = start + static_cast<std::ptrdiff_t>(i);
                const double sample = (idx >= 0 && idx < length) ? x[static_cast<std::size_t>(idx)] : 0.0;
                buffer[i] = {sample * window[i], 0.0};
            }
            plan.forward(buffer);
            std::copy_n(buffer.begin(), cfg.bins(), out.bins.frame(c, t).begin());
        }
    }
    return out;
}

Waveform istft(const Spectrogram& s, const StftConfig& cfg, std::size_t length) {
    cfg.validate();
    if (!(s.config == cfg)) {
        fail(ErrorCode::ConfigMismatch, "spectrogram was produced with fft_size " +
                                            std::to_string(s.config.fft_size) + "/hop " +
                                            std::to_string(s.config.hop) + ", asked to invert with fft_size " +
                                            std::to_string(cfg.fft_size) + "/hop " + std::to_string(cfg.hop));
    }
    if (s.bins.bins() != cfg.bins()) {
        fail(ErrorCode::ConfigMismatch, "spectrogram has " + std::to_string(s.bins.bins()) + " bins, expected " +
                                            std::to_string(cfg.bins()));
    }
    const std::size_t frames = s.bins.frames();
    if (length > reconstructable_length(frames, cfg)) {
        fail(ErrorCode::InvalidArgument, "requested length " + std::to_string(length) + " exceeds the " +
                                             std::to_string(reconstructable_length(frames, cfg)) +
                                             " samples covered by " + std::to_string(frames) + " frames");
    }

    const std::size_t n = cfg.fft_size;
    const std::size_t pad = cfg.center_pad ? n / 2 : 0;
    const std::size_t span = frames == 0 ? 0 : (frames - 1) * cfg.hop + n;
    const auto window = hann_window(n);
    const FftPlan plan(n);

    // The squared-window envelope depends only on the frame layout.
    std::vector<double> envelope(span, 0.0);
    for (std::size_t t = 0; t < frames; ++t) {
        kernels::mul_acc(window, window, std::span<double>(envelope).subspan(t * cfg.hop, n));
    }

    Waveform out(s.bins.channels(), length, s.sample_rate > 0 ? s.sample_rate : 1);
    std::vector<Complex> buffer(n);
    std::vector<double> frame_real(n);
    std::vector<double> accum(span);

    for (std::size_t c = 0; c < s.bins.channels(); ++c) {
        std::fill(accum.begin(), accum.end(), 0.0);
        for (std::size_t t = 0; t < frames; ++t) {
            const auto half = s.bins.frame(c, t);
            for (std::size_t k = 0; k < half.size(); ++k) buffer[k] = half[k];
            for (std::size_t k = 1; k < n / 2; ++k) buffer[n - k] = std::conj(half[k]);
            plan.inverse(buffer);
            for (std::size_t i = 0; i < n; ++i) frame_real[i] = buffer[i].real();
            kernels::mul_acc(window, frame_real, std::span<double>(accum).subspan(t * cfg.hop, n));
        }
        auto y = out.channel(c);
        for (std::size_t i = 0; i < length; ++i) {
            const double e = envelope[i + pad];
            y[i] = e > 1e-12 ? accum[i + pad] / e : 0.0;
        }
    }
    return out;
}

RealTensor magnitude(const ComplexTensor& bins) {
    RealTensor out(bins.shape());
    kernels::complex_abs(bins.data(), out.data());
    return out;
}

RealTensor magnitude(const Spectrogram& s) { return magnitude(s.bins); }

}  // namespace dannasep
