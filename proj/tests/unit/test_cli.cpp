#include "cli.hpp"
#include "dannasep/audio_io.hpp"
#include "dannasep/blend.hpp"
#include "dannasep/bsseval.hpp"
#include "dannasep/dsmag.hpp"
#include "dannasep/json_io.hpp"
#include "dannasep/pipeline.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

using namespace dannasep;
namespace dt = dannasep::testing;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

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

const std::string kToyConfig = std::string(DANNASEP_SOURCE_DIR) + "/configs/toy_pipeline.json";

}  // namespace

TEST_CASE("usage errors exit 2 with a single diagnostic line") {
    auto r = invoke({});
    CHECK(r.code == cli::kExitUsage);
    CHECK(r.err.rfind("error[Usage]:", 0) == 0);

    r = invoke({"frobnicate"});
    CHECK(r.code == cli::kExitUsage);

    r = invoke({"separate", "--input", "/nonexistent/mix.wav", "--config", kToyConfig, "--out", "/tmp/x"});
    CHECK(r.code == cli::kExitUsage);
    CHECK(r.err.find("/nonexistent/mix.wav") != std::string::npos);

    dt::TempDir dir("cli");
    write_wav(Waveform(2, 100, 44100), dir / "mix.wav");
    r = invoke({"separate", "--input", (dir / "mix.wav").string(), "--config", "/nonexistent/cfg.json", "--out",
                (dir / "o").string()});
    CHECK(r.code == cli::kExitUsage);
    CHECK(r.err.find("/nonexistent/cfg.json") != std::string::npos);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);

    r = invoke({"--help"});
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out.find("search-weights") != std::string::npos);
}

TEST_CASE("separate writes four stems and is idempotent") {
    dt::TempDir dir("cli");
    std::mt19937_64 rng(81);
    write_wav(dt::random_waveform(rng, 2, 30000, 44100, 0.5), dir / "mix.wav");
    const auto args = [&](const std::string& out, const std::string& threads) {
        return std::vector<std::string>{"separate", "--input", (dir / "mix.wav").string(), "--config", kToyConfig,
                                        "--out", (dir / out).string(), "--threads", threads};
    };
    REQUIRE(invoke(args("a", "1")).code == cli::kExitOk);
    REQUIRE(invoke(args("b", "3")).code == cli::kExitOk);
    for (auto name : kSourceNames) {
        const auto a = slurp(stem_path(dir / "a", name)), b = slurp(stem_path(dir / "b", name));
        CHECK(!a.empty());
        CHECK(a == b);
    }
}

TEST_CASE("separate with a stem directory lacking vocals exits 1") {
    dt::TempDir dir("cli");
    std::mt19937_64 rng(82);
    const auto src = float_sources(rng, 2000);
    write_wav(sum_of(src), dir / "mix.wav");
    write_stems(src, dir / "stems");
    fs::remove(dir / "stems" / "vocals.wav");
    std::ofstream(dir / "cfg.json") << R"({"weights": {"models": ["ext"], "weights": [[1, 1, 1, 1]]},
        "models": [{"name": "ext", "domain": "T", "source": {"type": "stems-directory", "path": "stems"}}]})";
    const auto r = invoke({"separate", "--input", (dir / "mix.wav").string(), "--config", (dir / "cfg.json").string(),
                           "--out", (dir / "o").string()});
    CHECK(r.code == cli::kExitRuntime);
    CHECK(r.err.rfind("error[MissingStem]:", 0) == 0);
}

TEST_CASE("eval reports the cap for identical stems and matches the library") {
    dt::TempDir dir("cli");
    std::mt19937_64 rng(83);
    const auto refs = float_sources(rng, 16000);
    auto ests = refs;
    std::normal_distribution<double> n(0.0, 0.05);
    for (auto& w : ests)
        for (double& v : w.samples()) v = static_cast<float>(v + n(rng));
    write_stems(refs, dir / "ref");
    write_stems(ests, dir / "est");

    auto r = invoke({"eval", "--estimates", (dir / "ref").string(), "--references", (dir / "ref").string(), "--out",
                     (dir / "same.json").string(), "--csv", (dir / "same.csv").string(), "--filter-len", "16"});
    REQUIRE(r.code == cli::kExitOk);
    const auto same = read_json_file(dir / "same.json");
    for (const auto& [name, m] : same.at("medians").items()) CHECK(m.get<double>() == kSdrCapDb);
    CHECK(slurp(dir / "same.csv").rfind("Drums,Bass,Other,Vocals,Avg\n", 0) == 0);

    r = invoke({"eval", "--estimates", (dir / "est").string(), "--references", (dir / "ref").string(), "--out",
                (dir / "noisy.json").string(), "--filter-len", "16", "--win", "0.5", "--hop", "0.5"});
    REQUIRE(r.code == cli::kExitOk);
    const auto noisy = read_json_file(dir / "noisy.json");
    const auto lib = sdr_frames(refs, ests, EvalConfig{16, 0.5, 0.5});
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(noisy.at("medians").at(std::string(kSourceNames[j])).get<double>() == doctest::Approx(lib.medians[j]));
    }

    auto shorter = refs;
    shorter[2] = refs[2].resized(15000);
    write_stems(shorter, dir / "short");
    r = invoke({"eval", "--estimates", (dir / "short").string(), "--references", (dir / "ref").string(), "--out",
                (dir / "bad.json").string()});
    CHECK(r.code == cli::kExitRuntime);
    CHECK(r.err.rfind("error[LengthMismatch]:", 0) == 0);
}

TEST_CASE("blend of identical directories reproduces the stems") {
    dt::TempDir dir("cli");
    std::mt19937_64 rng(84);
    const auto src = float_sources(rng, 1500);
    write_stems(src, dir / "m");
    const std::string m = (dir / "m").string();
    const std::string weights = std::string(DANNASEP_SOURCE_DIR) + "/data/weights/danna_sep.json";
    auto r = invoke({"blend", "--stems", m, "--stems", m, "--stems", m, "--weights", weights, "--out",
                     (dir / "o").string()});
    REQUIRE(r.code == cli::kExitOk);
    const auto out = read_stems(dir / "o");
    for (std::size_t j = 0; j < 4; ++j) CHECK(out[j] == src[j]);

    r = invoke({"blend", "--stems", m, "--stems", m, "--out", (dir / "p").string()});
    CHECK(r.code == cli::kExitRuntime);
    CHECK(r.err.rfind("error[ModelCountMismatch]:", 0) == 0);
}

TEST_CASE("search-weights emits valid weights for the cancellation fixture") {
    dt::TempDir dir("cli");
    std::mt19937_64 rng(85);
    const auto refs = float_sources(rng, 4000);
    SourceWaveformSet a = refs, b = refs;
    std::normal_distribution<double> n(0.0, 0.1);
    for (std::size_t j = 0; j < 4; ++j)
        for (std::size_t i = 0; i < a[j].samples().size(); ++i) {
            const double e = static_cast<float>(n(rng));
            a[j].samples()[i] += e;
            b[j].samples()[i] -= e;
        }
    write_stems(refs, dir / "ref");
    write_stems(a, dir / "a");
    write_stems(b, dir / "b");
    const auto r = invoke({"search-weights", "--stems", (dir / "a").string(), "--stems", (dir / "b").string(),
                           "--references", (dir / "ref").string(), "--out", (dir / "w.json").string(),
                           "--grid-step", "0.5", "--models", "A", "--models", "B", "--filter-len", "8", "--win",
                           "0.25", "--hop", "0.25"});
    REQUIRE(r.code == cli::kExitOk);
    const auto w = load_weights(dir / "w.json");
    CHECK(w.model_names() == std::vector<std::string>{"A", "B"});
    CHECK_NOTHROW(validate_weights(w.rows()));
    for (std::size_t j = 0; j < 4; ++j) CHECK(w(0, j) == 0.5);
}

TEST_CASE("wiener with one source returns the mixture") {
    dt::TempDir dir("cli");
    std::mt19937_64 rng(86);
    auto mix = dt::random_waveform(rng, 2, 6000, 8000, 0.5);
    for (double& v : mix.samples()) v = static_cast<float>(v);
    write_wav(mix, dir / "mix.wav");
    StftConfig cfg;
    cfg.fft_size = 512;
    cfg.hop = 128;
    fs::create_directories(dir / "mags");
    write_dsmag(magnitude(stft(mix, cfg)), dir / "mags" / "vocals.dsmag");
    const auto r = invoke({"wiener", "--input", (dir / "mix.wav").string(), "--mags", (dir / "mags").string(), "--out",
                           (dir / "o").string(), "--fft-size", "512", "--hop", "128"});
    REQUIRE(r.code == cli::kExitOk);
    CHECK(!fs::exists(dir / "o" / "drums.wav"));
    const auto out = read_wav(dir / "o" / "vocals.wav");
    CHECK(dt::max_abs_diff(out.samples(), mix.samples()) <= 1e-4);
}
