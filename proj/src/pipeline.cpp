#include "dannasep/pipeline.hpp"

#include "dannasep/dsmag.hpp"
#include "dannasep/error.hpp"

#include <algorithm>
#include <exception>
#include <thread>

namespace dannasep {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Waveform checked_stem(const std::filesystem::path& path, const Waveform& mix, std::size_t tolerance) {
    Waveform stem = read_wav(path);
    if (stem.sample_rate() != mix.sample_rate()) {
        fail(ErrorCode::SampleRateMismatch, "'" + path.string() + "' is at " + std::to_string(stem.sample_rate()) +
                                                " Hz, mixture at " + std::to_string(mix.sample_rate()) + " Hz");
    }
    if (stem.channels() != mix.channels()) {
        fail(ErrorCode::ShapeMismatch, "'" + path.string() + "' has " + std::to_string(stem.channels()) +
                                           " channels, mixture has " + std::to_string(mix.channels()));
    }
    return fit_length(stem, mix.length(), tolerance, path.string());
}

std::vector<RealTensor> directory_magnitudes(const std::filesystem::path& dir, const Waveform& mix,
                                             const Spectrogram& mix_spec, const StftConfig& stft_cfg) {
    std::vector<RealTensor> mags;
    for (std::string_view name : kSourceNames) {
        const auto dsmag = stem_path(dir, name, ".dsmag");
        const auto wav = stem_path(dir, name, ".wav");
        if (std::filesystem::exists(dsmag)) {
            RealTensor m = read_dsmag(dsmag);
            if (!(m.shape() == mix_spec.bins.shape())) {
                fail(ErrorCode::ShapeMismatch, "'" + dsmag.string() + "' is " + std::to_string(m.channels()) + "x" +
                                                   std::to_string(m.frames()) + "x" + std::to_string(m.bins()) +
                                                   ", mixture spectrogram is " +
                                                   std::to_string(mix_spec.bins.channels()) + "x" +
                                                   std::to_string(mix_spec.bins.frames()) + "x" +
                                                   std::to_string(mix_spec.bins.bins()));
            }
            mags.push_back(std::move(m));
        } else if (std::filesystem::exists(wav)) {
            mags.push_back(magnitude(stft(checked_stem(wav, mix, stft_cfg.hop), stft_cfg)));
        } else {
            fail(ErrorCode::MissingStem, "stem '" + std::string(name) + "' not found in '" + dir.string() +
                                             "' (expected " + wav.filename().string() + " or " +
                                             dsmag.filename().string() + ")");
        }
    }
    return mags;
}

}  // namespace

void PipelineConfig::validate() const {
    if (models.empty()) fail(ErrorCode::InvalidConfig, "pipeline has no models");
    stft.validate();
    mwf.validate();
    if (weights.models() != models.size()) {
        fail(ErrorCode::WeightModelMismatch, "weights have " + std::to_string(weights.models()) + " rows but the "
                                                 "pipeline lists " + std::to_string(models.size()) + " models");
    }
    if (weights.sources() != kNumSources) {
        fail(ErrorCode::WeightModelMismatch, "weights cover " + std::to_string(weights.sources()) + " sources, expected " +
                                                 std::to_string(kNumSources));
    }
    for (std::size_t m = 0; m < models.size(); ++m) {
        const ModelEntry& e = models[m];
        if (weights.model_names()[m] != e.name) {
            fail(ErrorCode::WeightModelMismatch, "weight row " + std::to_string(m) + " is for '" +
                                                     weights.model_names()[m] + "' but model " + std::to_string(m) +
                                                     " is '" + e.name + "'");
        }
        std::visit(overloaded{
                       [&](const BuiltinBandMask& b) {
                           if (e.domain != ModelDomain::time_frequency) {
                               fail(ErrorCode::InvalidConfig, "band-mask model '" + e.name + "' must be TF");
                           }
                           if (b.model.bands.size() != kNumSources) {
                               fail(ErrorCode::InvalidConfig, "band-mask model '" + e.name + "' needs four bands");
                           }
                       },
                       [&](const BuiltinMultiDecoder& d) {
                           if (e.domain != ModelDomain::time) {
                               fail(ErrorCode::InvalidConfig, "multi-decoder model '" + e.name + "' must be T");
                           }
                           d.spec.validate();
                           if (d.spec.num_sources != kNumSources) {
                               fail(ErrorCode::InvalidConfig, "multi-decoder model '" + e.name + "' needs four sources");
                           }
                       },
                       [](const StemsDirectory&) {},
                   },
                   e.source);
    }
}

std::filesystem::path stem_path(const std::filesystem::path& dir, std::string_view source, std::string_view ext) {
    return dir / (std::string(source) + std::string(ext));
}

SourceWaveformSet read_stems(const std::filesystem::path& dir) {
    SourceWaveformSet stems;
    for (std::string_view name : kSourceNames) {
        const auto path = stem_path(dir, name);
        if (!std::filesystem::exists(path)) {
            fail(ErrorCode::MissingStem, "stem '" + std::string(name) + "' not found: '" + path.string() + "'");
        }
        stems.push_back(read_wav(path));
    }
    return stems;
}

void write_stems(const SourceWaveformSet& stems, const std::filesystem::path& dir, WavEncoding encoding) {
    if (stems.size() != kNumSources) {
        fail(ErrorCode::ShapeMismatch, "expected four stems, got " + std::to_string(stems.size()));
    }
    std::filesystem::create_directories(dir);
    for (std::size_t j = 0; j < stems.size(); ++j) write_wav(stems[j], stem_path(dir, kSourceNames[j]), encoding);
}

Waveform fit_length(const Waveform& stem, std::size_t length, std::size_t tolerance, std::string_view what) {
    if (stem.length() == length) return stem;
    const std::size_t diff = stem.length() > length ? stem.length() - length : length - stem.length();
    if (diff > tolerance) {
        fail(ErrorCode::LengthMismatch, std::string(what) + " has " + std::to_string(stem.length()) +
                                            " samples, expected " + std::to_string(length) + " (tolerance " +
                                            std::to_string(tolerance) + ")");
    }
    return stem.resized(length);
}

SourceWaveformSet run_model(const Waveform& mix, const ModelEntry& entry, const PipelineConfig& cfg,
                            const Spectrogram* mix_spectrogram) {
    if (entry.domain == ModelDomain::time) {
        return std::visit(overloaded{
                              [&](const BuiltinMultiDecoder& d) {
                                  return multi_decoder_forward(mix, d.spec, {.seed = d.seed});
                              },
                              [&](const StemsDirectory& s) {
                                  SourceWaveformSet stems;
                                  for (std::string_view name : kSourceNames) {
                                      const auto path = stem_path(s.path, name);
                                      if (!std::filesystem::exists(path)) {
                                          fail(ErrorCode::MissingStem, "model '" + entry.name + "': stem '" +
                                                                           std::string(name) + "' not found: '" +
                                                                           path.string() + "'");
                                      }
                                      stems.push_back(checked_stem(path, mix, cfg.stft.hop));
                                  }
                                  return stems;
                              },
                              [&](const BuiltinBandMask&) -> SourceWaveformSet {
                                  fail(ErrorCode::InvalidConfig, "band-mask model '" + entry.name + "' is TF only");
                              },
                          },
                          entry.source);
    }

    Spectrogram local;
    if (mix_spectrogram == nullptr) {
        local = stft(mix, cfg.stft);
        mix_spectrogram = &local;
    }
    const std::vector<RealTensor> mags = std::visit(
        overloaded{
            [&](const BuiltinBandMask& b) { return band_mask_separate(mix, b.model, cfg.stft).magnitudes; },
            [&](const StemsDirectory& s) { return directory_magnitudes(s.path, mix, *mix_spectrogram, cfg.stft); },
            [&](const BuiltinMultiDecoder&) -> std::vector<RealTensor> {
                fail(ErrorCode::InvalidConfig, "multi-decoder model '" + entry.name + "' is T only");
            },
        },
        entry.source);

    const SourceSpectrogramSet refined = mwf(mags, mix_spectrogram->bins, cfg.mwf);
    SourceWaveformSet stems;
    stems.reserve(refined.size());
    for (const ComplexTensor& bins : refined) {
        const Spectrogram s{bins, cfg.stft, mix.sample_rate()};
        stems.push_back(istft(s, cfg.stft, mix.length()));
    }
    return stems;
}

SourceWaveformSet run(const Waveform& mix, const PipelineConfig& cfg, const RunOptions& options) {
    cfg.validate();
    mix.check_finite();
    if (mix.length() == 0) fail(ErrorCode::EmptySignal, "mixture is empty");

    const bool any_tf = std::any_of(cfg.models.begin(), cfg.models.end(),
                                    [](const ModelEntry& e) { return e.domain == ModelDomain::time_frequency; });
    Spectrogram mix_spec;
    if (any_tf) mix_spec = stft(mix, cfg.stft);

    const std::size_t count = cfg.models.size();
    std::vector<SourceWaveformSet> branches(count);
    std::vector<std::exception_ptr> errors(count);
    auto work = [&](std::size_t m) {
        try {
            branches[m] = run_model(mix, cfg.models[m], cfg, any_tf ? &mix_spec : nullptr);
        } catch (...) {
            errors[m] = std::current_exception();
        }
    };

    const std::size_t workers = std::clamp<std::size_t>(options.threads, 1, count);
    if (workers == 1) {
        for (std::size_t m = 0; m < count; ++m) work(m);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t m = w; m < count; m += workers) work(m);
            });
        }
        for (auto& t : pool) t.join();
    }
    // Report the first failing model in configuration order.
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return blend(branches, cfg.weights);
}

}  // namespace dannasep
