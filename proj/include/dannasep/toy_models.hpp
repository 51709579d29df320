#pragma once

#include "dannasep/stft.hpp"
#include "dannasep/waveform.hpp"

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace dannasep {

// Stand-in separation models. None of them is trained; they exist so the
// time-frequency and waveform branches of the pipeline can run end to end.

struct FrequencyBand {
    double low_hz = 0.0;
    double high_hz = 0.0;  // exclusive, except that +inf / Nyquist closes the spectrum
};

/// Assigns every STFT bin to the source whose band contains it, then mixes
/// in `leakage`: mask_j = (1 - leakage) [j owns bin] + leakage / J.
struct BandMaskModel {
    std::vector<FrequencyBand> bands;  // one per source, source order
    double leakage = 0.0;

    /// Bands must be nonempty, start at 0 Hz, be contiguous in some order,
    /// and reach Nyquist; 0 <= leakage < 1.
    void validate(int sample_rate) const;
};

/// bass [0, 250), drums [250, 2k), other [2k, 8k), vocals [8k, Nyquist].
BandMaskModel default_band_mask_model(double leakage = 0.0);

/// masks[j][f], summing to 1 over j for every bin f.
std::vector<std::vector<double>> band_masks(const BandMaskModel& model, const StftConfig& cfg, int sample_rate);

struct BandMaskOutput {
    std::vector<RealTensor> magnitudes;  // per source: mask x |stft(mix)|
    Spectrogram mix;
};

BandMaskOutput band_mask_separate(const Waveform& mix, const BandMaskModel& model, const StftConfig& cfg);

/// Convolutional encoder with one shared bottleneck and `num_decoders`
/// decoder stacks. With one decoder it emits every source's channels; with
/// four, each decoder emits one source.
struct MultiDecoderSpec {
    std::size_t audio_channels = 2;
    std::size_t num_sources = kNumSources;
    std::vector<std::size_t> encoder_channels;  // output width per encoder layer
    std::vector<std::size_t> decoder_channels;  // hidden widths per decoder, bottleneck side first
    std::size_t num_decoders = 1;
    std::size_t kernel_size = 8;
    std::size_t stride = 2;  // per encoder layer; decoders upsample by the same factor

    std::size_t layers() const noexcept { return encoder_channels.size(); }
    void validate() const;
};

struct ConvParamCount {
    std::size_t encoder = 0;
    std::size_t decoder_input = 0;       // bottleneck -> first hidden width, all decoders
    std::size_t decoder_interior_weights = 0;
    std::size_t decoder_interior_biases = 0;
    std::size_t decoder_output = 0;      // last hidden width -> audio, all decoders
    std::size_t total = 0;
};

/// Exact parameter count: each conv layer contributes C_out * C_in * kernel
/// weights plus C_out biases; decoder layers are counted once per decoder.
ConvParamCount conv_param_count(const MultiDecoderSpec& spec);

struct ForwardOptions {
    std::uint64_t seed = 0;
    bool zero_biases = false;
};

/// Runs the toy network with deterministic pseudo-random weights. The input
/// is zero-padded to a multiple of stride^layers and every output is cut
/// back to the input length. Throws LengthIncompatible if the input is
/// shorter than stride^layers samples.
SourceWaveformSet multi_decoder_forward(const Waveform& mix, const MultiDecoderSpec& spec,
                                        const ForwardOptions& options = {});

}  // namespace dannasep
