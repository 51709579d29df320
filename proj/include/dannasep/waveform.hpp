#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace dannasep {

inline constexpr std::size_t kNumSources = 4;
inline constexpr std::array<std::string_view, kNumSources> kSourceNames = {"drums", "bass", "other",
                                                                           "vocals"};

/// Multichannel PCM signal, stored channel-major.
class Waveform {
public:
    Waveform() = default;
    Waveform(std::size_t channels, std::size_t length, int sample_rate);

    std::size_t channels() const noexcept { return channels_; }
    std::size_t length() const noexcept { return length_; }
    int sample_rate() const noexcept { return sample_rate_; }

    std::span<double> channel(std::size_t c) noexcept {
        return {samples_.data() + c * length_, length_};
    }
    std::span<const double> channel(std::size_t c) const noexcept {
        return {samples_.data() + c * length_, length_};
    }

    double& at(std::size_t c, std::size_t i) noexcept { return samples_[c * length_ + i]; }
    double at(std::size_t c, std::size_t i) const noexcept { return samples_[c * length_ + i]; }

    std::span<double> samples() noexcept { return samples_; }
    std::span<const double> samples() const noexcept { return samples_; }

    bool same_shape(const Waveform& other) const noexcept {
        return channels_ == other.channels_ && length_ == other.length_;
    }

    /// Zero-pads or truncates every channel to `length`.
    Waveform resized(std::size_t length) const;

    /// Throws InvalidArgument on NaN/Inf samples.
    void check_finite() const;

    friend bool operator==(const Waveform&, const Waveform&) = default;

private:
    std::size_t channels_ = 0;
    std::size_t length_ = 0;
    int sample_rate_ = 0;
    std::vector<double> samples_;
};

/// Ordered per-source waveforms sharing shape and sample rate.
using SourceWaveformSet = std::vector<Waveform>;

/// Throws ShapeMismatch / SampleRateMismatch unless all members agree (and
/// the set is non-empty).
void check_uniform(std::span<const Waveform> set);

}  // namespace dannasep
