#pragma once

#include "dannasep/audio_io.hpp"
#include "dannasep/blend.hpp"
#include "dannasep/stft.hpp"
#include "dannasep/toy_models.hpp"
#include "dannasep/waveform.hpp"
#include "dannasep/wiener.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace dannasep {

/// T models emit waveforms; TF models emit magnitudes refined through MWF.
enum class ModelDomain { time, time_frequency };

struct BuiltinBandMask {
    BandMaskModel model;
};

struct BuiltinMultiDecoder {
    MultiDecoderSpec spec;
    std::uint64_t seed = 0;
};

/// drums/bass/other/vocals as .wav; TF entries may instead provide
/// <source>.dsmag magnitude tensors (preferred when both exist).
struct StemsDirectory {
    std::filesystem::path path;
};

using ModelSource = std::variant<BuiltinBandMask, BuiltinMultiDecoder, StemsDirectory>;

struct ModelEntry {
    std::string name;
    ModelDomain domain = ModelDomain::time;
    ModelSource source;
};

struct PipelineConfig {
    std::vector<ModelEntry> models;
    StftConfig stft;
    MwfConfig mwf;
    BlendWeights weights = default_blend_weights();

    /// Throws WeightModelMismatch if weight rows do not line up with the
    /// model entries (count and names), InvalidConfig for domain/source
    /// combinations that cannot work.
    void validate() const;
};

struct RunOptions {
    std::size_t threads = 1;  // concurrent model branches
};

/// Stem file for `source` inside `dir` with the given extension.
std::filesystem::path stem_path(const std::filesystem::path& dir, std::string_view source, std::string_view ext = ".wav");

/// Reads drums/bass/other/vocals.wav. Throws MissingStem naming the file.
SourceWaveformSet read_stems(const std::filesystem::path& dir);
void write_stems(const SourceWaveformSet& stems, const std::filesystem::path& dir,
                 WavEncoding encoding = WavEncoding::float32);

/// Pads or truncates `stem` to `length` when they differ by at most
/// `tolerance` samples; otherwise throws LengthMismatch.
Waveform fit_length(const Waveform& stem, std::size_t length, std::size_t tolerance, std::string_view what);

/// Per-source waveforms of one model branch, before blending.
SourceWaveformSet run_model(const Waveform& mix, const ModelEntry& entry, const PipelineConfig& cfg,
                            const Spectrogram* mix_spectrogram = nullptr);

/// mixture -> per-model stems -> weighted blend. Deterministic: the result
/// does not depend on `options.threads`.
SourceWaveformSet run(const Waveform& mix, const PipelineConfig& cfg, const RunOptions& options = {});

}  // namespace dannasep
