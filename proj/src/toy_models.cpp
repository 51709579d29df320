#include "dannasep/toy_models.hpp"

#include "dannasep/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace dannasep {

void BandMaskModel::validate(int sample_rate) const {
    if (bands.empty()) fail(ErrorCode::InvalidConfig, "band mask model needs at least one band");
    if (!(leakage >= 0.0 && leakage < 1.0)) {
        fail(ErrorCode::InvalidConfig, "leakage must lie in [0, 1), got " + std::to_string(leakage));
    }
    std::vector<FrequencyBand> sorted = bands;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.low_hz < b.low_hz; });
    if (sorted.front().low_hz != 0.0) fail(ErrorCode::InvalidConfig, "bands must start at 0 Hz");
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (!(sorted[i].high_hz >= sorted[i].low_hz)) {
            fail(ErrorCode::InvalidConfig, "band " + std::to_string(i) + " has high edge below its low edge");
        }
        if (i + 1 < sorted.size() && sorted[i].high_hz != sorted[i + 1].low_hz) {
            fail(ErrorCode::InvalidConfig, "bands leave a gap or overlap at " + std::to_string(sorted[i].high_hz) + " Hz");
        }
    }
    if (sorted.back().high_hz < 0.5 * sample_rate) fail(ErrorCode::InvalidConfig, "bands do not reach Nyquist");
}

BandMaskModel default_band_mask_model(double leakage) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    // Source order: drums, bass, other, vocals.
    return {{{250.0, 2000.0}, {0.0, 250.0}, {2000.0, 8000.0}, {8000.0, inf}}, leakage};
}

std::vector<std::vector<double>> band_masks(const BandMaskModel& model, const StftConfig& cfg, int sample_rate) {
    model.validate(sample_rate);
    const std::size_t sources = model.bands.size();
    const std::size_t bins = cfg.bins();
    const double nyquist = 0.5 * sample_rate;
    const double share = model.leakage / static_cast<double>(sources);

    std::vector<std::vector<double>> masks(sources, std::vector<double>(bins, share));
    for (std::size_t f = 0; f < bins; ++f) {
        const double hz = static_cast<double>(f) * sample_rate / static_cast<double>(cfg.fft_size);
        std::size_t owner = sources;
        for (std::size_t j = 0; j < sources && owner == sources; ++j) {
            const auto& b = model.bands[j];
            const bool closes_spectrum = b.high_hz >= nyquist && hz >= b.low_hz;
            if ((hz >= b.low_hz && hz < b.high_hz) || closes_spectrum) owner = j;
        }
        if (owner == sources) fail(ErrorCode::InvalidConfig, "bin at " + std::to_string(hz) + " Hz has no band");
        if (model.leakage == 0.0) {
            masks[owner][f] = 1.0;
        } else {
            masks[owner][f] += 1.0 - model.leakage;
        }
    }
    return masks;
}

BandMaskOutput band_mask_separate(const Waveform& mix, const BandMaskModel& model, const StftConfig& cfg) {
    BandMaskOutput out;
    out.mix = stft(mix, cfg);
    const auto masks = band_masks(model, cfg, mix.sample_rate());
    const RealTensor mag = magnitude(out.mix);
    for (const auto& mask : masks) {
        RealTensor m(mag.shape());
        for (std::size_t c = 0; c < mag.channels(); ++c) {
            for (std::size_t t = 0; t < mag.frames(); ++t) {
                for (std::size_t f = 0; f < mag.bins(); ++f) m(c, t, f) = mask[f] * mag(c, t, f);
            }
        }
        out.magnitudes.push_back(std::move(m));
    }
    return out;
}

void MultiDecoderSpec::validate() const {
    if (audio_channels == 0 || num_sources == 0) fail(ErrorCode::InvalidConfig, "channel and source counts must be positive");
    if (encoder_channels.empty() || decoder_channels.empty()) {
        fail(ErrorCode::InvalidConfig, "encoder and decoder need at least one layer");
    }
    for (std::size_t c : encoder_channels) {
        if (c == 0) fail(ErrorCode::InvalidConfig, "encoder widths must be positive");
    }
    for (std::size_t c : decoder_channels) {
        if (c == 0) fail(ErrorCode::InvalidConfig, "decoder widths must be positive");
    }
    if (num_decoders != 1 && num_decoders != num_sources) {
        fail(ErrorCode::InvalidConfig, "num_decoders must be 1 or the source count, got " + std::to_string(num_decoders));
    }
    if (kernel_size == 0 || stride == 0) fail(ErrorCode::InvalidConfig, "kernel size and stride must be positive");
}

namespace {

struct ConvShape {
    std::size_t in;
    std::size_t out;
};

std::size_t conv_params(ConvShape s, std::size_t kernel) { return s.out * s.in * kernel + s.out; }

std::vector<ConvShape> encoder_shapes(const MultiDecoderSpec& spec) {
    std::vector<ConvShape> shapes;
    std::size_t in = spec.audio_channels;
    for (std::size_t c : spec.encoder_channels) {
        shapes.push_back({in, c});
        in = c;
    }
    return shapes;
}

std::vector<ConvShape> decoder_shapes(const MultiDecoderSpec& spec) {
    const std::size_t outputs = spec.num_decoders == 1 ? spec.audio_channels * spec.num_sources : spec.audio_channels;
    std::vector<ConvShape> shapes;
    std::size_t in = spec.encoder_channels.back();
    for (std::size_t c : spec.decoder_channels) {
        shapes.push_back({in, c});
        in = c;
    }
    shapes.push_back({in, outputs});
    return shapes;
}

struct ConvLayer {
    ConvShape shape;
    std::size_t kernel;
    std::vector<double> weights;  // [out][in][k]
    std::vector<double> biases;
};

ConvLayer make_layer(ConvShape shape, std::size_t kernel, std::mt19937_64& rng, bool zero_biases) {
    ConvLayer layer{shape, kernel, std::vector<double>(shape.out * shape.in * kernel), std::vector<double>(shape.out)};
    const double bound = 1.0 / std::sqrt(static_cast<double>(shape.in * kernel));
    auto uniform = [&] {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        return (2.0 * u - 1.0) * bound;
    };
    for (double& w : layer.weights) w = uniform();
    for (double& b : layer.biases) b = zero_biases ? 0.0 : uniform();
    return layer;
}

using Activations = std::vector<std::vector<double>>;  // [channel][time]

// Strided convolution with centered taps; output length = input / stride.
Activations conv(const ConvLayer& layer, const Activations& x, std::size_t stride, bool relu) {
    const std::size_t in_len = x.front().size();
    const std::size_t out_len = in_len / stride;
    const auto pad = static_cast<std::ptrdiff_t>((layer.kernel - 1) / 2);
    Activations y(layer.shape.out, std::vector<double>(out_len));
    for (std::size_t o = 0; o < layer.shape.out; ++o) {
        for (std::size_t t = 0; t < out_len; ++t) {
            double acc = layer.biases[o];
            for (std::size_t i = 0; i < layer.shape.in; ++i) {
                const double* w = &layer.weights[(o * layer.shape.in + i) * layer.kernel];
                const auto& xi = x[i];
                for (std::size_t k = 0; k < layer.kernel; ++k) {
                    const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(t * stride + k) - pad;
                    if (idx >= 0 && idx < static_cast<std::ptrdiff_t>(in_len)) acc += w[k] * xi[static_cast<std::size_t>(idx)];
                }
            }
            y[o][t] = relu ? std::max(0.0, acc) : acc;
        }
    }
    return y;
}

Activations upsample(const Activations& x, std::size_t factor) {
    Activations y(x.size());
    for (std::size_t c = 0; c < x.size(); ++c) {
        y[c].reserve(x[c].size() * factor);
        for (double v : x[c]) y[c].insert(y[c].end(), factor, v);
    }
    return y;
}

}  // namespace

ConvParamCount conv_param_count(const MultiDecoderSpec& spec) {
    spec.validate();
    ConvParamCount count;
    for (const auto& s : encoder_shapes(spec)) count.encoder += conv_params(s, spec.kernel_size);
    const auto dec = decoder_shapes(spec);
    count.decoder_input = spec.num_decoders * conv_params(dec.front(), spec.kernel_size);
    count.decoder_output = spec.num_decoders * conv_params(dec.back(), spec.kernel_size);
    for (std::size_t l = 1; l + 1 < dec.size(); ++l) {
        count.decoder_interior_weights += spec.num_decoders * dec[l].out * dec[l].in * spec.kernel_size;
        count.decoder_interior_biases += spec.num_decoders * dec[l].out;
    }
    count.total = count.encoder + count.decoder_input + count.decoder_interior_weights +
                  count.decoder_interior_biases + count.decoder_output;
    return count;
}

SourceWaveformSet multi_decoder_forward(const Waveform& mix, const MultiDecoderSpec& spec,
                                        const ForwardOptions& options) {
    spec.validate();
    if (mix.channels() != spec.audio_channels) {
        fail(ErrorCode::ShapeMismatch, "network expects " + std::to_string(spec.audio_channels) +
                                           " channels, input has " + std::to_string(mix.channels()));
    }
    std::size_t block = 1;
    for (std::size_t l = 0; l < spec.layers(); ++l) block *= spec.stride;
    if (mix.length() < block) {
        fail(ErrorCode::LengthIncompatible, "input of " + std::to_string(mix.length()) +
                                                " samples is shorter than the encoder stride stack (" +
                                                std::to_string(block) + ")");
    }
    const std::size_t padded = (mix.length() + block - 1) / block * block;

    std::mt19937_64 rng(options.seed);
    std::vector<ConvLayer> encoder;
    for (const auto& s : encoder_shapes(spec)) encoder.push_back(make_layer(s, spec.kernel_size, rng, options.zero_biases));
    std::vector<std::vector<ConvLayer>> decoders(spec.num_decoders);
    for (auto& d : decoders) {
        for (const auto& s : decoder_shapes(spec)) d.push_back(make_layer(s, spec.kernel_size, rng, options.zero_biases));
    }

    Activations x(mix.channels(), std::vector<double>(padded, 0.0));
    for (std::size_t c = 0; c < mix.channels(); ++c) std::copy(mix.channel(c).begin(), mix.channel(c).end(), x[c].begin());
    for (const auto& layer : encoder) x = conv(layer, x, spec.stride, true);

    SourceWaveformSet out(spec.num_sources, Waveform(spec.audio_channels, mix.length(), mix.sample_rate()));
    for (std::size_t d = 0; d < decoders.size(); ++d) {
        Activations h = x;
        std::size_t upsampled = 0;
        for (std::size_t l = 0; l < decoders[d].size(); ++l) {
            if (upsampled < spec.layers()) {
                h = upsample(h, spec.stride);
                ++upsampled;
            }
            const bool last = l + 1 == decoders[d].size();
            h = conv(decoders[d][l], h, 1, !last);
        }
        for (; upsampled < spec.layers(); ++upsampled) h = upsample(h, spec.stride);

        // One decoder: output channel j * audio + c belongs to source j.
        for (std::size_t ch = 0; ch < h.size(); ++ch) {
            const std::size_t source = spec.num_decoders == 1 ? ch / spec.audio_channels : d;
            const std::size_t c = ch % spec.audio_channels;
            std::copy_n(h[ch].begin(), mix.length(), out[source].channel(c).begin());
        }
    }
    return out;
}

}  // namespace dannasep
