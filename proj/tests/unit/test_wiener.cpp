#include "dannasep/error.hpp"
#include "dannasep/wiener.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace dannasep;
namespace dt = dannasep::testing;

namespace {

std::vector<RealTensor> random_mags(std::mt19937_64& rng, std::size_t sources, Shape3 shape) {
    std::vector<RealTensor> m;
    for (std::size_t j = 0; j < sources; ++j) m.push_back(dt::random_positive(rng, shape));
    return m;
}

// Largest per-bin relative error of sum_j est_j against the mixture, over
// bins whose channel vector has norm above 1e-6.
double conservation_error(const SourceSpectrogramSet& est, const ComplexTensor& mix) {
    double worst = 0.0;
    for (std::size_t t = 0; t < mix.frames(); ++t)
        for (std::size_t f = 0; f < mix.bins(); ++f) {
            double diff = 0.0, norm = 0.0;
            for (std::size_t c = 0; c < mix.channels(); ++c) {
                Complex s = 0.0;
                for (const auto& y : est) s += y(c, t, f);
                diff += std::norm(s - mix(c, t, f));
                norm += std::norm(mix(c, t, f));
            }
            if (std::sqrt(norm) > 1e-6) worst = std::max(worst, std::sqrt(diff / norm));
        }
    return worst;
}

double max_diff(const ComplexTensor& a, const ComplexTensor& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

}  // namespace

TEST_CASE("power-ratio mask example") {
    ComplexTensor mix(Shape3{1, 1, 1}, Complex(2.0, 0.0));
    std::vector<RealTensor> mags = {RealTensor(Shape3{1, 1, 1}, 3.0), RealTensor(Shape3{1, 1, 1}, 1.0)};
    const auto y = initial_estimates(mags, mix, 2.0);
    CHECK(y[0](0, 0, 0).real() == doctest::Approx(1.8).epsilon(1e-12));
    CHECK(y[1](0, 0, 0).real() == doctest::Approx(0.2).epsilon(1e-12));

    std::vector<RealTensor> equal = {RealTensor(Shape3{1, 1, 1}, 0.7), RealTensor(Shape3{1, 1, 1}, 0.7)};
    for (double alpha : {0.5, 1.0, 2.0, 3.0}) {
        const auto e = initial_estimates(equal, mix, alpha);
        CHECK(e[0](0, 0, 0).real() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("single source returns the mixture") {
    std::mt19937_64 rng(31);
    for (std::size_t channels : {1u, 2u}) {
        const auto mix = dt::random_complex(rng, {channels, 6, 9});
        const auto mags = random_mags(rng, 1, mix.shape());
        for (std::size_t it : {0u, 1u, 3u}) {
            MwfConfig cfg;
            cfg.iterations = it;
            const auto out = mwf(mags, mix, cfg);
            CHECK(max_diff(out[0], mix) <= 1e-9);
        }
    }
}

TEST_CASE("zero iterations leave estimates untouched") {
    std::mt19937_64 rng(32);
    const auto mix = dt::random_complex(rng, {2, 4, 5});
    SourceSpectrogramSet est = {dt::random_complex(rng, mix.shape()), dt::random_complex(rng, mix.shape())};
    MwfConfig cfg;
    cfg.iterations = 0;
    const auto out = em_iterate(est, mix, cfg);
    CHECK(out[0] == est[0]);
    CHECK(out[1] == est[1]);
}

TEST_CASE("one EM pass matches the loop oracle") {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t channels = trial % 2 == 0 ? 1 : 2;
        const std::size_t sources = 2 + trial % 3;
        const auto mix = dt::random_complex(rng, {channels, static_cast<std::size_t>(2 + trial % 3), 3});
        const auto mags = random_mags(rng, sources, mix.shape());
        const auto init = initial_estimates(mags, mix, 2.0);
        MwfConfig cfg;
        const auto out = em_iterate(init, mix, cfg);

        dt::Grid4 g;
        for (const auto& y : init) g.push_back(dt::to_grid(y));
        const auto ref = dt::em_oracle(g, dt::to_grid(mix), cfg.eps);
        double worst = 0.0;
        for (std::size_t j = 0; j < sources; ++j)
            for (std::size_t c = 0; c < channels; ++c)
                for (std::size_t t = 0; t < mix.frames(); ++t)
                    for (std::size_t f = 0; f < mix.bins(); ++f)
                        worst = std::max(worst, std::abs(out[j](c, t, f) - ref[j][c][t][f]));
        CHECK(worst <= 1e-8);
    }
}

TEST_CASE("outputs sum to the mixture") {
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 10; ++trial) {
        const auto mix = dt::random_complex(rng, {2, 8, 12});
        const auto mags = random_mags(rng, 4, mix.shape());
        for (std::size_t it : {0u, 1u, 2u, 5u}) {
            MwfConfig cfg;
            cfg.iterations = it;
            CHECK(conservation_error(mwf(mags, mix, cfg), mix) <= 1e-4);
        }
    }
}

TEST_CASE("silent bins get zero estimates") {
    ComplexTensor mix(Shape3{1, 1, 2});
    mix(0, 0, 1) = {1.0, -1.0};
    std::vector<RealTensor> mags = {RealTensor(mix.shape()), RealTensor(mix.shape())};
    mags[0](0, 0, 1) = 1.0;
    const auto y = initial_estimates(mags, mix, 2.0);
    CHECK(y[0](0, 0, 0) == Complex(0.0, 0.0));
    CHECK(y[1](0, 0, 0) == Complex(0.0, 0.0));
}

TEST_CASE("spatial covariances stay Hermitian and PSD") {
    std::mt19937_64 rng(35);
    const auto mix = dt::random_complex(rng, {2, 10, 7});
    const auto mags = random_mags(rng, 3, mix.shape());
    MwfConfig cfg;
    cfg.iterations = 4;
    std::vector<SpatialModel> trace;
    (void)em_iterate(initial_estimates(mags, mix, 2.0), mix, cfg, &trace);
    REQUIRE(trace.size() == 4);
    for (const auto& model : trace) {
        for (const auto& r : model.covariance) {
            for (std::size_t f = 0; f < r.bins(); ++f) {
                CHECK(std::abs(r(f, 0, 1) - std::conj(r(f, 1, 0))) <= 1e-10);
                CHECK(std::fabs(r(f, 0, 0).imag()) <= 1e-10);
                CHECK(std::fabs(r(f, 1, 1).imag()) <= 1e-10);
                const double a = r(f, 0, 0).real(), d = r(f, 1, 1).real();
                const double lo = 0.5 * (a + d) - std::sqrt(0.25 * (a - d) * (a - d) + std::norm(r(f, 0, 1)));
                CHECK(lo >= -1e-8);
            }
        }
        for (const auto& v : model.psd)
            for (double x : v.data()) CHECK(x >= 0.0);
    }
}

TEST_CASE("source order is equivariant") {
    std::mt19937_64 rng(36);
    const auto mix = dt::random_complex(rng, {2, 6, 8});
    auto mags = random_mags(rng, 4, mix.shape());
    MwfConfig cfg;
    cfg.iterations = 2;
    const auto out = mwf(mags, mix, cfg);
    std::reverse(mags.begin(), mags.end());
    const auto rev = mwf(mags, mix, cfg);
    for (std::size_t j = 0; j < 4; ++j) CHECK(max_diff(out[j], rev[3 - j]) <= 1e-12);
}

TEST_CASE("scaling the inputs scales the outputs") {
    std::mt19937_64 rng(37);
    const double c = 3.0;
    const auto mix = dt::random_complex(rng, {2, 6, 8});
    const auto mags = random_mags(rng, 3, mix.shape());
    auto mix_s = mix;
    for (auto& z : mix_s.data()) z *= c;
    auto mags_s = mags;
    for (auto& m : mags_s)
        for (double& v : m.data()) v *= c;

    MwfConfig cfg;
    cfg.iterations = 0;
    auto a = mwf(mags, mix, cfg), b = mwf(mags_s, mix_s, cfg);
    for (std::size_t j = 0; j < 3; ++j) {
        for (auto& z : a[j].data()) z *= c;
        CHECK(max_diff(a[j], b[j]) <= 1e-9);
    }

    cfg.iterations = 1;
    MwfConfig scaled = cfg;
    scaled.eps = cfg.eps * c * c;
    a = mwf(mags, mix, cfg);
    b = mwf(mags_s, mix_s, scaled);
    for (std::size_t j = 0; j < 3; ++j) {
        for (auto& z : a[j].data()) z *= c;
        CHECK(max_diff(a[j], b[j]) <= 1e-9);
    }
}

TEST_CASE("hard-panned sources land in their own channel") {
    std::mt19937_64 rng(38);
    std::normal_distribution<double> n(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    const Shape3 shape{2, 24, 16};
    ComplexTensor mix(shape);
    std::vector<RealTensor> mags = {RealTensor(shape), RealTensor(shape)};
    for (std::size_t t = 0; t < shape.frames; ++t)
        for (std::size_t f = 0; f < shape.bins; ++f) {
            const bool left_loud = coin(rng);
            const Complex s1 = Complex(n(rng), n(rng)) * (left_loud ? 1.0 : 0.05);
            const Complex s2 = Complex(n(rng), n(rng)) * (left_loud ? 0.05 : 1.0);
            mix(0, t, f) = s1;
            mix(1, t, f) = s2;
            // Channel-agnostic magnitude estimates: spatial information must
            // come from the EM step.
            for (std::size_t c = 0; c < 2; ++c) {
                mags[0](c, t, f) = std::abs(s1) / std::sqrt(2.0);
                mags[1](c, t, f) = std::abs(s2) / std::sqrt(2.0);
            }
        }
    MwfConfig cfg;
    const auto out = mwf(mags, mix, cfg);
    for (std::size_t j = 0; j < 2; ++j) {
        double own = 0.0, total = 0.0;
        for (std::size_t c = 0; c < 2; ++c)
            for (std::size_t t = 0; t < shape.frames; ++t)
                for (std::size_t f = 0; f < shape.bins; ++f) {
                    const double e = std::norm(out[j](c, t, f));
                    total += e;
                    if (c == j) own += e;
                }
        CHECK(own / total >= 0.95);
    }
}

TEST_CASE("invalid inputs are rejected") {
    ComplexTensor mix(Shape3{3, 2, 2}, Complex(1.0, 0.0));
    SourceSpectrogramSet est = {mix, mix};
    MwfConfig cfg;
    try {
        (void)em_iterate(est, mix, cfg);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnsupportedChannels);
    }
    ComplexTensor mono(Shape3{1, 2, 2});
    std::vector<RealTensor> bad = {RealTensor(Shape3{1, 2, 3})};
    CHECK_THROWS_AS((void)initial_estimates(bad, mono, 2.0), Error);
    cfg.eps = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}
