#include "dannasep/bsseval.hpp"
#include "dannasep/dsmag.hpp"
#include "dannasep/error.hpp"
#include "dannasep/json_io.hpp"
#include "dannasep/pipeline.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

using namespace dannasep;
namespace dt = dannasep::testing;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::InvalidArgument;
}

StftConfig small_stft() {
    StftConfig cfg;
    cfg.fft_size = 512;
    cfg.hop = 128;
    return cfg;
}

// Round-trips through float32 so that written stems read back bit-exactly.
SourceWaveformSet float_sources(std::mt19937_64& rng, std::size_t length, int rate = 8000) {
    SourceWaveformSet s;
    for (std::size_t j = 0; j < kNumSources; ++j) {
        auto w = dt::random_waveform(rng, 2, length, rate, 0.4);
        for (double& v : w.samples()) v = static_cast<float>(v);
        s.push_back(w);
    }
    return s;
}

Waveform sum_of(const SourceWaveformSet& s) {
    Waveform mix(s[0].channels(), s[0].length(), s[0].sample_rate());
    for (const auto& w : s)
        for (std::size_t i = 0; i < w.samples().size(); ++i) mix.samples()[i] += w.samples()[i];
    return mix;
}

BlendWeights single_model(const std::string& name) {
    return validate_weights({{1.0, 1.0, 1.0, 1.0}}, {name});
}

}  // namespace

TEST_CASE("one T model with identity weights passes its stems through") {
    dt::TempDir dir("pipe");
    std::mt19937_64 rng(71);
    const auto src = float_sources(rng, 3000);
    write_stems(src, dir.path() / "m");
    PipelineConfig cfg;
    cfg.stft = small_stft();
    cfg.models = {{"ext", ModelDomain::time, StemsDirectory{dir.path() / "m"}}};
    cfg.weights = single_model("ext");
    const auto out = run(sum_of(src), cfg);
    for (std::size_t j = 0; j < 4; ++j) CHECK(out[j] == src[j]);
}

TEST_CASE("TF model fed true magnitudes reconstructs the mixture") {
    std::mt19937_64 rng(72);
    const auto src = float_sources(rng, 4000);
    const auto mix = sum_of(src);
    const auto cfg = small_stft();

    // J = 1: the filter is the identity, so only the STFT round trip remains.
    const auto spec = stft(mix, cfg);
    const std::vector<RealTensor> mags = {magnitude(spec)};
    const auto refined = mwf(mags, spec.bins, MwfConfig{});
    const auto back = istft(Spectrogram{refined[0], cfg, mix.sample_rate()}, cfg, mix.length());
    CHECK(dt::max_abs_diff(back.samples(), mix.samples()) <= 1e-4);

    // Four sources via a directory of DSMAG1 magnitude files: outputs still sum to the mix.
    dt::TempDir dir("pipe");
    for (std::size_t j = 0; j < 4; ++j) {
        write_dsmag(magnitude(stft(src[j], cfg)), stem_path(dir.path(), kSourceNames[j], ".dsmag"));
    }
    PipelineConfig pc;
    pc.stft = cfg;
    pc.models = {{"oracle", ModelDomain::time_frequency, StemsDirectory{dir.path()}}};
    pc.weights = single_model("oracle");
    const auto out = run(mix, pc);
    CHECK(dt::max_abs_diff(sum_of(out).samples(), mix.samples()) <= 1e-4);

    // Same result as composing the stages by hand.
    const auto mix_spec = stft(mix, cfg);
    std::vector<RealTensor> src_mags;
    for (std::size_t j = 0; j < 4; ++j) {
        RealTensor m = magnitude(stft(src[j], cfg));
        for (double& v : m.data()) v = static_cast<float>(v);
        src_mags.push_back(m);
    }
    const auto filtered = mwf(src_mags, mix_spec.bins, MwfConfig{});
    for (std::size_t j = 0; j < 4; ++j) {
        const auto direct = istft(Spectrogram{filtered[j], cfg, mix.sample_rate()}, cfg, mix.length());
        CHECK(out[j] == direct);
    }
}

TEST_CASE("complementary noisy models fuse into a better estimate") {
    dt::TempDir dir("pipe");
    std::mt19937_64 rng(73);
    const auto src = float_sources(rng, 8000);
    SourceWaveformSet a, b;
    std::normal_distribution<double> n(0.0, 0.2);
    for (const auto& s : src) {
        Waveform wa = s, wb = s;
        for (std::size_t i = 0; i < s.samples().size(); ++i) {
            const double e = static_cast<float>(n(rng));
            wa.samples()[i] += e;
            wb.samples()[i] -= e;
        }
        a.push_back(wa);
        b.push_back(wb);
    }
    write_stems(a, dir.path() / "a");
    write_stems(b, dir.path() / "b");
    PipelineConfig cfg;
    cfg.stft = small_stft();
    cfg.models = {{"A", ModelDomain::time, StemsDirectory{dir.path() / "a"}},
                  {"B", ModelDomain::time, StemsDirectory{dir.path() / "b"}}};
    cfg.weights = validate_weights({{0.5, 0.5, 0.5, 0.5}, {0.5, 0.5, 0.5, 0.5}}, {"A", "B"});
    const auto fused = run(sum_of(src), cfg);
    const EvalConfig ev{8, 0.25, 0.25};
    const auto sf = sdr_frames(src, fused, ev), sa = sdr_frames(src, read_stems(dir.path() / "a"), ev),
               sb = sdr_frames(src, read_stems(dir.path() / "b"), ev);
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(sf.medians[j] > sa.medians[j]);
        CHECK(sf.medians[j] > sb.medians[j]);
    }
}

TEST_CASE("toy pipeline is deterministic across thread counts") {
    const auto cfg = load_pipeline_config(std::filesystem::path(DANNASEP_SOURCE_DIR) / "configs/toy_pipeline.json");
    CHECK(cfg.models.size() == 3);
    CHECK(cfg.weights.model_names()[2] == "Demucs");
    std::mt19937_64 rng(74);
    const auto mix = dt::random_waveform(rng, 2, 44100, 44100, 0.5);
    const auto one = run(mix, cfg, {1});
    const auto again = run(mix, cfg, {1});
    const auto three = run(mix, cfg, {3});
    CHECK(one == again);
    CHECK(one == three);
    for (const auto& s : one) CHECK(s.same_shape(mix));
}

TEST_CASE("stems are fitted within one hop") {
    Waveform w(1, 10, 8000);
    w.at(0, 9) = 1.0;
    CHECK(fit_length(w, 12, 2, "x").length() == 12);
    CHECK(fit_length(w, 12, 2, "x").at(0, 11) == 0.0);
    CHECK(fit_length(w, 9, 2, "x").length() == 9);
    CHECK(code_of([&] { (void)fit_length(w, 13, 2, "x"); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("missing stems and mismatched weights are reported") {
    dt::TempDir dir("pipe");
    std::mt19937_64 rng(75);
    auto src = float_sources(rng, 1000);
    write_stems(src, dir.path());
    std::filesystem::remove(dir.path() / "vocals.wav");
    CHECK(code_of([&] { (void)read_stems(dir.path()); }) == ErrorCode::MissingStem);

    PipelineConfig cfg;
    cfg.models = {{"ext", ModelDomain::time, StemsDirectory{dir.path()}}};
    CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::WeightModelMismatch);
    cfg.weights = single_model("other-name");
    CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::WeightModelMismatch);
    cfg.weights = single_model("ext");
    CHECK(code_of([&] { (void)run(sum_of(src), cfg); }) == ErrorCode::MissingStem);
}

TEST_CASE("DSMAG1 round trip and header checks") {
    dt::TempDir dir("dsmag");
    std::mt19937_64 rng(76);
    auto m = dt::random_positive(rng, {2, 3, 5});
    for (double& v : m.data()) v = static_cast<float>(v);
    write_dsmag(m, dir / "m.dsmag");
    CHECK(read_dsmag(dir / "m.dsmag") == m);
    CHECK(std::filesystem::file_size(dir / "m.dsmag") == 6 + 12 + 4 * 30);

    {
        std::ofstream f(dir / "bad.dsmag", std::ios::binary);
        f << "DSMAG2xxxxxxxxxxxx";
    }
    CHECK(code_of([&] { (void)read_dsmag(dir / "bad.dsmag"); }) == ErrorCode::MalformedHeader);
    std::filesystem::resize_file(dir / "m.dsmag", 6 + 12 + 4 * 29);
    CHECK(code_of([&] { (void)read_dsmag(dir / "m.dsmag"); }) == ErrorCode::TruncatedData);
}

TEST_CASE("weights and reports serialize") {
    const auto shipped = load_weights(std::filesystem::path(DANNASEP_SOURCE_DIR) / "data/weights/danna_sep.json");
    CHECK(shipped.rows() == default_blend_weights().rows());
    CHECK(weights_from_json(nlohmann::json::parse(default_weights_json())).rows() == shipped.rows());
    CHECK(weights_from_json(weights_to_json(shipped)).rows() == shipped.rows());

    SdrReport r;
    r.sources = {"drums", "bass", "other", "vocals"};
    r.frames = {{1.0, std::nan("")}, {2.0, 2.0}, {3.0, 3.0}, {4.0, 4.0}};
    r.medians = {1.0, 2.0, 3.0, 4.0};
    r.overall_avg = 2.5;
    const auto j = report_to_json(r, EvalConfig{});
    CHECK(j.at("frames").at("drums").at(1).is_null());
    CHECK(j.at("medians").at("vocals").get<double>() == 4.0);
    CHECK(j.at("overall_avg").get<double>() == 2.5);
    CHECK(report_to_csv(r) == "Drums,Bass,Other,Vocals,Avg\n1.0000,2.0000,3.0000,4.0000,2.5000\n");
}

TEST_CASE("config errors name the problem") {
    nlohmann::json j = nlohmann::json::parse(R"({"models": [{"name": "x", "domain": "Q",
        "source": {"type": "stems-directory", "path": "."}}]})");
    CHECK(code_of([&] { (void)pipeline_config_from_json(j, "."); }) == ErrorCode::InvalidConfig);
    j = nlohmann::json::parse(R"({"models": []})");
    CHECK(code_of([&] { (void)pipeline_config_from_json(j, "."); }) == ErrorCode::InvalidConfig);
}
