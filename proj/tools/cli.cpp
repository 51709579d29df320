#include "cli.hpp"

#include "dannasep/audio_io.hpp"
#include "dannasep/blend.hpp"
#include "dannasep/bsseval.hpp"
#include "dannasep/dsmag.hpp"
#include "dannasep/error.hpp"
#include "dannasep/json_io.hpp"
#include "dannasep/pipeline.hpp"
#include "dannasep/wiener.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <ostream>

namespace dannasep::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError {
    std::string message;
};

void require_file(const std::string& flag, const fs::path& path) {
    if (!fs::is_regular_file(path)) throw UsageError{flag + ": file not found: '" + path.string() + "'"};
}

void require_dir(const std::string& flag, const fs::path& path) {
    if (!fs::is_directory(path)) throw UsageError{flag + ": directory not found: '" + path.string() + "'"};
}

std::string one_line(std::string text) {
    std::replace(text.begin(), text.end(), '\n', ' ');
    while (!text.empty() && text.back() == ' ') text.pop_back();
    return text;
}

struct SeparateArgs {
    std::string input, config, out, encoding = "float32";
    std::size_t threads = 1;
};

struct BlendArgs {
    std::vector<std::string> stems;
    std::string weights, out, encoding = "float32";
};

struct EvalArgs {
    std::string estimates, references, out, csv;
    EvalConfig eval;
    std::size_t threads = 1;
};

struct SearchArgs {
    std::vector<std::string> stems, models;
    std::string references, out;
    double grid_step = 0.01;
    EvalConfig eval;
};

struct WienerArgs {
    std::string input, mags, out, encoding = "float32";
    MwfConfig mwf;
    StftConfig stft;
};

void add_eval_flags(CLI::App* cmd, EvalConfig& cfg) {
    cmd->add_option("--filter-len", cfg.filter_len, "Distortion filter length in taps")->capture_default_str();
    cmd->add_option("--win", cfg.win, "Evaluation window in seconds")->capture_default_str();
    cmd->add_option("--hop", cfg.hop, "Evaluation hop in seconds")->capture_default_str();
}

int cmd_separate(const SeparateArgs& a, std::ostream& out) {
    require_file("--input", a.input);
    require_file("--config", a.config);
    const auto encoding = parse_wav_encoding(a.encoding);
    const PipelineConfig cfg = load_pipeline_config(a.config);
    const Waveform mix = read_wav(a.input);
    const SourceWaveformSet stems = run(mix, cfg, {.threads = a.threads});
    write_stems(stems, a.out, encoding);
    out << "wrote " << stems.size() << " stems to " << a.out << "\n";
    return kExitOk;
}

int cmd_blend(const BlendArgs& a, std::ostream& out) {
    for (const auto& d : a.stems) require_dir("--stems", d);
    if (!a.weights.empty()) require_file("--weights", a.weights);
    const auto encoding = parse_wav_encoding(a.encoding);
    const BlendWeights weights = a.weights.empty() ? default_blend_weights() : load_weights(a.weights);
    std::vector<SourceWaveformSet> per_model;
    for (const auto& d : a.stems) per_model.push_back(read_stems(d));
    const SourceWaveformSet fused = blend(per_model, weights);
    write_stems(fused, a.out, encoding);
    out << "blended " << per_model.size() << " models into " << a.out << "\n";
    return kExitOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
    require_dir("--estimates", a.estimates);
    require_dir("--references", a.references);
    const SourceWaveformSet est = read_stems(a.estimates);
    const SourceWaveformSet ref = read_stems(a.references);
    const SdrReport report = sdr_frames(ref, est, a.eval, a.threads);
    write_file_atomic(a.out, dump_json(report_to_json(report, a.eval)));
    if (!a.csv.empty()) write_file_atomic(a.csv, report_to_csv(report));
    out << report_to_csv(report);
    return kExitOk;
}

int cmd_search_weights(const SearchArgs& a, std::ostream& out) {
    for (const auto& d : a.stems) require_dir("--stems", d);
    require_dir("--references", a.references);
    if (!a.models.empty() && a.models.size() != a.stems.size()) {
        throw UsageError{"--models: " + std::to_string(a.models.size()) + " names for " +
                         std::to_string(a.stems.size()) + " stem directories"};
    }
    std::vector<SourceWaveformSet> per_model;
    for (const auto& d : a.stems) per_model.push_back(read_stems(d));
    const SourceWaveformSet ref = read_stems(a.references);
    const BlendWeights weights = search_weights_sdr(per_model, ref, a.grid_step, a.eval, a.models);
    save_weights(weights, a.out);
    out << dump_json(weights_to_json(weights));
    return kExitOk;
}

int cmd_wiener(const WienerArgs& a, std::ostream& out) {
    require_file("--input", a.input);
    require_dir("--mags", a.mags);
    const auto encoding = parse_wav_encoding(a.encoding);
    a.stft.validate();
    a.mwf.validate();
    const Waveform mix = read_wav(a.input);
    const Spectrogram spec = stft(mix, a.stft);

    std::vector<std::string> names;
    std::vector<RealTensor> mags;
    for (std::string_view name : kSourceNames) {
        const auto dsmag = stem_path(a.mags, name, ".dsmag");
        const auto wav = stem_path(a.mags, name, ".wav");
        if (fs::exists(dsmag)) {
            mags.push_back(read_dsmag(dsmag));
        } else if (fs::exists(wav)) {
            Waveform stem = read_wav(wav);
            if (stem.sample_rate() != mix.sample_rate()) {
                fail(ErrorCode::SampleRateMismatch, "'" + wav.string() + "' sample rate differs from the mixture");
            }
            mags.push_back(magnitude(stft(fit_length(stem, mix.length(), a.stft.hop, wav.string()), a.stft)));
        } else {
            continue;
        }
        names.emplace_back(name);
    }
    if (mags.empty()) {
        fail(ErrorCode::MissingStem, "no <source>.dsmag or <source>.wav magnitudes in '" + a.mags + "'");
    }

    const SourceSpectrogramSet refined = mwf(mags, spec.bins, a.mwf);
    fs::create_directories(a.out);
    for (std::size_t j = 0; j < refined.size(); ++j) {
        const Spectrogram s{refined[j], a.stft, mix.sample_rate()};
        write_wav(istft(s, a.stft, mix.length()), stem_path(a.out, names[j]), encoding);
    }
    out << "filtered " << refined.size() << " sources into " << a.out << "\n";
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Source-separation fusion and evaluation toolkit", "dannasep"};
    app.require_subcommand(1, 1);

    SeparateArgs sep;
    auto* separate = app.add_subcommand("separate", "Run the separation pipeline on a mixture");
    separate->add_option("--input", sep.input, "Mixture WAV file")->required();
    separate->add_option("--config", sep.config, "Pipeline configuration JSON")->required();
    separate->add_option("--out", sep.out, "Output directory for drums/bass/other/vocals.wav")->required();
    separate->add_option("--threads", sep.threads, "Model branches evaluated concurrently")->capture_default_str();
    separate->add_option("--encoding", sep.encoding, "Output encoding: float32 or pcm16")->capture_default_str();

    BlendArgs bl;
    auto* blend_cmd = app.add_subcommand("blend", "Weighted per-source average of several models' stems");
    blend_cmd->add_option("--stems", bl.stems, "Stem directory of one model; repeat in weight-row order")->required();
    blend_cmd->add_option("--weights", bl.weights, "Weights JSON (default: built-in fusion weights)");
    blend_cmd->add_option("--out", bl.out, "Output directory")->required();
    blend_cmd->add_option("--encoding", bl.encoding, "Output encoding: float32 or pcm16")->capture_default_str();

    EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "Framewise SDR of estimated stems against references");
    eval->add_option("--estimates", ev.estimates, "Directory of estimated stems")->required();
    eval->add_option("--references", ev.references, "Directory of reference stems")->required();
    eval->add_option("--out", ev.out, "Report JSON path")->required();
    eval->add_option("--csv", ev.csv, "Optional CSV summary path");
    eval->add_option("--threads", ev.threads, "Frames evaluated concurrently")->capture_default_str();
    add_eval_flags(eval, ev.eval);

    SearchArgs sw;
    auto* search = app.add_subcommand("search-weights", "Grid search of per-source blend weights by median SDR");
    search->add_option("--stems", sw.stems, "Stem directory of one model; repeat per model")->required();
    search->add_option("--references", sw.references, "Directory of reference stems")->required();
    search->add_option("--out", sw.out, "Weights JSON output path")->required();
    search->add_option("--grid-step", sw.grid_step, "Simplex grid spacing (must divide 1)")->capture_default_str();
    search->add_option("--models", sw.models, "Model names, one per --stems");
    add_eval_flags(search, sw.eval);

    WienerArgs wi;
    auto* wiener = app.add_subcommand("wiener", "Multichannel Wiener filtering of per-source magnitudes");
    wiener->add_option("--input", wi.input, "Mixture WAV file")->required();
    wiener->add_option("--mags", wi.mags, "Directory of <source>.dsmag or <source>.wav magnitude sources")->required();
    wiener->add_option("--out", wi.out, "Output directory")->required();
    wiener->add_option("--iterations", wi.mwf.iterations, "EM iterations")->capture_default_str();
    wiener->add_option("--eps", wi.mwf.eps, "Covariance regularizer")->capture_default_str();
    wiener->add_option("--mask-power", wi.mwf.mask_power, "Initial soft-mask exponent")->capture_default_str();
    wiener->add_option("--fft-size", wi.stft.fft_size, "STFT size")->capture_default_str();
    wiener->add_option("--hop", wi.stft.hop, "STFT hop")->capture_default_str();
    wiener->add_option("--encoding", wi.encoding, "Output encoding: float32 or pcm16")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error[Usage]: " << one_line(e.what()) << "\n";
        return kExitUsage;
    }

    try {
        if (*separate) return cmd_separate(sep, out);
        if (*blend_cmd) return cmd_blend(bl, out);
        if (*eval) return cmd_eval(ev, out);
        if (*search) return cmd_search_weights(sw, out);
        if (*wiener) return cmd_wiener(wi, out);
    } catch (const UsageError& e) {
        err << "error[Usage]: " << one_line(e.message) << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error[" << error_code_name(e.code()) << "]: " << one_line(e.what()) << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error[Internal]: " << one_line(e.what()) << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace dannasep::cli
