#include "dannasep/waveform.hpp"

#include "dannasep/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dannasep {

Waveform::Waveform(std::size_t channels, std::size_t length, int sample_rate)
    : channels_(channels), length_(length), sample_rate_(sample_rate), samples_(channels * length, 0.0) {
    if (channels == 0) fail(ErrorCode::InvalidArgument, "waveform needs at least one channel");
    if (sample_rate <= 0) {
        fail(ErrorCode::InvalidArgument, "sample rate must be positive, got " + std::to_string(sample_rate));
    }
}

Waveform Waveform::resized(std::size_t length) const {
    Waveform out(channels_, length, sample_rate_);
    const std::size_t keep = std::min(length, length_);
    for (std::size_t c = 0; c < channels_; ++c) {
        std::copy_n(channel(c).begin(), keep, out.channel(c).begin());
    }
    return out;
}

void Waveform::check_finite() const {
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        if (!std::isfinite(samples_[i])) {
            fail(ErrorCode::InvalidArgument,
                 "non-finite sample at channel " + std::to_string(i / std::max<std::size_t>(length_, 1)) +
                     ", index " + std::to_string(i % std::max<std::size_t>(length_, 1)));
        }
    }
}

void check_uniform(std::span<const Waveform> set) {
    if (set.empty()) fail(ErrorCode::EmptyInput, "empty source set");
    const Waveform& first = set.front();
    for (std::size_t j = 1; j < set.size(); ++j) {
        if (!set[j].same_shape(first)) {
            fail(ErrorCode::ShapeMismatch, "source " + std::to_string(j) + " has shape " +
                                               std::to_string(set[j].channels()) + "x" +
                                               std::to_string(set[j].length()) + ", expected " +
                                               std::to_string(first.channels()) + "x" +
                                               std::to_string(first.length()));
        }
        if (set[j].sample_rate() != first.sample_rate()) {
            fail(ErrorCode::SampleRateMismatch, "source " + std::to_string(j) + " sample rate " +
                                                    std::to_string(set[j].sample_rate()) + " != " +
                                                    std::to_string(first.sample_rate()));
        }
    }
}

}  // namespace dannasep
