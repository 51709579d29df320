#include "dannasep/json_io.hpp"

#include "dannasep/audio_io.hpp"
#include "dannasep/error.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace dannasep {

using nlohmann::json;

namespace {

constexpr const char* kDefaultWeightsJson = R"({
  "models": ["X-UMX", "U-Net", "Demucs"],
  "sources": ["drums", "bass", "other", "vocals"],
  "weights": [
    [0.2, 0.1, 0.0, 0.2],
    [0.2, 0.17, 0.5, 0.4],
    [0.6, 0.73, 0.5, 0.4]
  ]
}
)";

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    return j.at(key).get<T>();
}

[[noreturn]] void bad_config(const std::string& what) { fail(ErrorCode::InvalidConfig, what); }

StftConfig stft_from_json(const json& j) {
    StftConfig cfg;
    if (j.is_null()) return cfg;
    cfg.fft_size = get_or<std::size_t>(j, "fft_size", cfg.fft_size);
    cfg.hop = get_or<std::size_t>(j, "hop", cfg.hop);
    cfg.center_pad = get_or<bool>(j, "center_pad", cfg.center_pad);
    if (get_or<std::string>(j, "window", "hann") != "hann") bad_config("only the hann window is supported");
    cfg.validate();
    return cfg;
}

MwfConfig mwf_from_json(const json& j) {
    MwfConfig cfg;
    if (j.is_null()) return cfg;
    cfg.iterations = get_or<std::size_t>(j, "iterations", cfg.iterations);
    cfg.eps = get_or<double>(j, "eps", cfg.eps);
    cfg.mask_power = get_or<double>(j, "mask_power", cfg.mask_power);
    cfg.validate();
    return cfg;
}

BandMaskModel band_mask_from_json(const json& j) {
    BandMaskModel model = default_band_mask_model(get_or<double>(j, "leakage", 0.0));
    if (j.contains("bands_hz")) {
        model.bands.clear();
        for (const auto& band : j.at("bands_hz")) {
            if (!band.is_array() || band.size() != 2) bad_config("bands_hz entries must be [low, high] pairs");
            const double high = band[1].is_null() ? std::numeric_limits<double>::infinity() : band[1].get<double>();
            model.bands.push_back({band[0].get<double>(), high});
        }
    }
    return model;
}

MultiDecoderSpec multi_decoder_from_json(const json& j) {
    MultiDecoderSpec spec;
    spec.audio_channels = get_or<std::size_t>(j, "audio_channels", spec.audio_channels);
    spec.encoder_channels = get_or<std::vector<std::size_t>>(j, "encoder_channels", {8, 8});
    spec.decoder_channels = get_or<std::vector<std::size_t>>(j, "decoder_channels", {4});
    spec.num_decoders = get_or<std::size_t>(j, "num_decoders", kNumSources);
    spec.kernel_size = get_or<std::size_t>(j, "kernel_size", spec.kernel_size);
    spec.stride = get_or<std::size_t>(j, "stride", spec.stride);
    spec.validate();
    return spec;
}

ModelEntry model_from_json(const json& j, const std::filesystem::path& base_dir) {
    ModelEntry entry;
    entry.name = j.at("name").get<std::string>();
    const auto domain = j.at("domain").get<std::string>();
    if (domain == "T") {
        entry.domain = ModelDomain::time;
    } else if (domain == "TF") {
        entry.domain = ModelDomain::time_frequency;
    } else {
        bad_config("model '" + entry.name + "' has domain '" + domain + "', expected T or TF");
    }
    const json& src = j.at("source");
    const auto type = src.at("type").get<std::string>();
    if (type == "stems-directory") {
        std::filesystem::path p = src.at("path").get<std::string>();
        entry.source = StemsDirectory{p.is_absolute() ? p : base_dir / p};
    } else if (type == "builtin-toy") {
        const auto model = src.at("model").get<std::string>();
        if (model == "band-mask") {
            entry.source = BuiltinBandMask{band_mask_from_json(src)};
        } else if (model == "multi-decoder") {
            entry.source = BuiltinMultiDecoder{multi_decoder_from_json(src), get_or<std::uint64_t>(src, "seed", 0)};
        } else {
            bad_config("unknown builtin toy model '" + model + "'");
        }
    } else {
        bad_config("model '" + entry.name + "' has unknown source type '" + type + "'");
    }
    return entry;
}

}  // namespace

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoFailure, "cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorCode::InvalidConfig, "'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

json weights_to_json(const BlendWeights& weights) {
    return json{{"models", weights.model_names()}, {"sources", weights.source_names()}, {"weights", weights.rows()}};
}

BlendWeights weights_from_json(const json& j) {
    try {
        auto rows = j.at("weights").get<std::vector<std::vector<double>>>();
        auto models = get_or<std::vector<std::string>>(j, "models", {});
        auto sources = get_or<std::vector<std::string>>(j, "sources", {});
        if (!sources.empty()) {
            for (std::size_t s = 0; s < sources.size() && s < kNumSources; ++s) {
                if (sources[s] != kSourceNames[s]) {
                    bad_config("weights list source '" + sources[s] + "' where '" + std::string(kSourceNames[s]) +
                               "' is expected");
                }
            }
        }
        return validate_weights(std::move(rows), std::move(models), std::move(sources));
    } catch (const json::exception& e) {
        fail(ErrorCode::InvalidConfig, std::string("malformed weights JSON: ") + e.what());
    }
}

BlendWeights load_weights(const std::filesystem::path& path) { return weights_from_json(read_json_file(path)); }

void save_weights(const BlendWeights& weights, const std::filesystem::path& path) {
    write_file_atomic(path, dump_json(weights_to_json(weights)));
}

std::string default_weights_json() { return kDefaultWeightsJson; }

json report_to_json(const SdrReport& report, const EvalConfig& cfg) {
    json frames = json::object();
    json medians = json::object();
    for (std::size_t j = 0; j < report.sources.size(); ++j) {
        json arr = json::array();
        if (j < report.frames.size()) {
            for (double v : report.frames[j]) arr.push_back(number_or_null(v));
        }
        frames[report.sources[j]] = std::move(arr);
        medians[report.sources[j]] = number_or_null(report.medians.at(j));
    }
    return json{{"sources", report.sources},
                {"frames", std::move(frames)},
                {"medians", std::move(medians)},
                {"overall_avg", number_or_null(report.overall_avg)},
                {"config", {{"filter_len", cfg.filter_len}, {"win", cfg.win}, {"hop", cfg.hop}}}};
}

std::string report_to_csv(const SdrReport& report) {
    std::ostringstream out;
    out << "Drums,Bass,Other,Vocals,Avg\n";
    out << std::fixed << std::setprecision(4);
    auto cell = [&](double v) {
        if (std::isfinite(v)) {
            out << v;
        } else {
            out << "nan";
        }
    };
    for (std::size_t j = 0; j < report.medians.size(); ++j) {
        cell(report.medians[j]);
        out << ',';
    }
    cell(report.overall_avg);
    out << '\n';
    return out.str();
}

PipelineConfig pipeline_config_from_json(const json& j, const std::filesystem::path& base_dir) {
    try {
        PipelineConfig cfg;
        cfg.stft = stft_from_json(j.contains("stft") ? j.at("stft") : json());
        cfg.mwf = mwf_from_json(j.contains("mwf") ? j.at("mwf") : json());
        for (const auto& m : j.at("models")) cfg.models.push_back(model_from_json(m, base_dir));
        if (j.contains("weights") && !j.at("weights").is_null()) {
            const json& w = j.at("weights");
            if (w.is_string()) {
                std::filesystem::path p = w.get<std::string>();
                cfg.weights = load_weights(p.is_absolute() ? p : base_dir / p);
            } else {
                cfg.weights = weights_from_json(w);
            }
        }
        cfg.validate();
        return cfg;
    } catch (const json::exception& e) {
        fail(ErrorCode::InvalidConfig, std::string("malformed pipeline config: ") + e.what());
    }
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    return pipeline_config_from_json(read_json_file(path), path.parent_path());
}

}  // namespace dannasep
