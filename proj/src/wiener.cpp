#include "dannasep/wiener.hpp"

#include "dannasep/error.hpp"

#include <cmath>
#include <string>

namespace dannasep {

namespace {

void check_estimates(std::span<const ComplexTensor> est, const ComplexTensor& mix) {
    if (est.empty()) fail(ErrorCode::EmptyInput, "no source estimates");
    for (std::size_t j = 0; j < est.size(); ++j) {
        if (!(est[j].shape() == mix.shape())) {
            fail(ErrorCode::ShapeMismatch, "estimate " + std::to_string(j) + " does not match the mixture shape");
        }
    }
    if (mix.channels() == 0 || mix.channels() > 2) {
        fail(ErrorCode::UnsupportedChannels,
             "multichannel Wiener filtering supports 1 or 2 channels, got " + std::to_string(mix.channels()));
    }
}

}  // namespace

void MwfConfig::validate() const {
    if (!(eps > 0.0) || !std::isfinite(eps)) fail(ErrorCode::InvalidConfig, "MWF eps must be positive");
    if (!(mask_power > 0.0) || !std::isfinite(mask_power)) {
        fail(ErrorCode::InvalidConfig, "MWF mask power must be positive");
    }
}

SourceSpectrogramSet initial_estimates(std::span<const RealTensor> mags, const ComplexTensor& mix,
                                       double mask_power) {
    if (mags.empty()) fail(ErrorCode::EmptyInput, "no source magnitudes");
    for (std::size_t j = 0; j < mags.size(); ++j) {
        if (!(mags[j].shape() == mix.shape())) {
            fail(ErrorCode::ShapeMismatch, "magnitude tensor " + std::to_string(j) + " does not match the mixture shape");
        }
    }
    const std::size_t n = mix.size();
    std::vector<double> denom(n, 0.0);
    std::vector<std::vector<double>> powered(mags.size(), std::vector<double>(n));
    for (std::size_t j = 0; j < mags.size(); ++j) {
        const auto m = mags[j].data();
        for (std::size_t i = 0; i < n; ++i) {
            powered[j][i] = std::pow(m[i], mask_power);
            denom[i] += powered[j][i];
        }
    }
    SourceSpectrogramSet out;
    out.reserve(mags.size());
    const auto x = mix.data();
    for (std::size_t j = 0; j < mags.size(); ++j) {
        ComplexTensor est(mix.shape());
        auto y = est.data();
        // An all-zero bin gets a zero mask rather than 0/0. Testing for zero
        // instead of adding a divisor guard keeps a lone source exact.
        for (std::size_t i = 0; i < n; ++i) y[i] = denom[i] > 0.0 ? (powered[j][i] / denom[i]) * x[i] : Complex{};
        out.push_back(std::move(est));
    }
    return out;
}

SpatialModel estimate_spatial_model(std::span<const ComplexTensor> est, double eps) {
    if (est.empty()) fail(ErrorCode::EmptyInput, "no source estimates");
    const Shape3 shape = est.front().shape();
    const std::size_t channels = shape.channels;
    const std::size_t frames = shape.frames;
    const std::size_t bins = shape.bins;

    SpatialModel model;
    model.psd.reserve(est.size());
    model.covariance.reserve(est.size());

    for (const ComplexTensor& y : est) {
        if (!(y.shape() == shape)) fail(ErrorCode::ShapeMismatch, "source estimates differ in shape");

        RealTensor v({1, frames, bins});
        for (std::size_t t = 0; t < frames; ++t) {
            for (std::size_t f = 0; f < bins; ++f) {
                double power = 0.0;
                for (std::size_t c = 0; c < channels; ++c) power += std::norm(y(c, t, f));
                v(0, t, f) = power / static_cast<double>(channels);
            }
        }

        SpatialCovariance r(channels, bins);
        for (std::size_t f = 0; f < bins; ++f) {
            double weight = 0.0;
            for (std::size_t t = 0; t < frames; ++t) {
                weight += v(0, t, f);
                for (std::size_t a = 0; a < channels; ++a) {
                    for (std::size_t b = 0; b < channels; ++b) r(f, a, b) += y(a, t, f) * std::conj(y(b, t, f));
                }
            }
            const double scale = 1.0 / (weight + eps);
            for (std::size_t a = 0; a < channels; ++a) {
                r(f, a, a) = {r(f, a, a).real() * scale, 0.0};
                for (std::size_t b = a + 1; b < channels; ++b) {
                    const Complex upper = 0.5 * (r(f, a, b) + std::conj(r(f, b, a))) * scale;
                    r(f, a, b) = upper;
                    r(f, b, a) = std::conj(upper);
                }
            }
        }
        model.psd.push_back(std::move(v));
        model.covariance.push_back(std::move(r));
    }
    return model;
}

SourceSpectrogramSet apply_wiener_filter(const SpatialModel& model, const ComplexTensor& mix, double eps) {
    const std::size_t sources = model.psd.size();
    if (sources == 0 || model.covariance.size() != sources) {
        fail(ErrorCode::EmptyInput, "spatial model has no sources");
    }
    const std::size_t channels = mix.channels();
    const std::size_t frames = mix.frames();
    const std::size_t bins = mix.bins();
    if (channels == 0 || channels > 2) {
        fail(ErrorCode::UnsupportedChannels,
             "multichannel Wiener filtering supports 1 or 2 channels, got " + std::to_string(channels));
    }
    for (std::size_t j = 0; j < sources; ++j) {
        if (!(model.psd[j].shape() == Shape3{1, frames, bins}) || model.covariance[j].channels() != channels ||
            model.covariance[j].bins() != bins) {
            fail(ErrorCode::ShapeMismatch, "spatial model of source " + std::to_string(j) + " does not match the mixture");
        }
    }

    // With one source the gain v R (v R + eps I)^-1 tends to the identity;
    // return that limit instead of an eps-perturbed copy of the mixture.
    if (sources == 1) return {mix};

    SourceSpectrogramSet out(sources, ComplexTensor(mix.shape()));

    for (std::size_t t = 0; t < frames; ++t) {
        for (std::size_t f = 0; f < bins; ++f) {
            if (channels == 1) {
                double c = eps;
                for (std::size_t j = 0; j < sources; ++j) c += model.psd[j](0, t, f) * model.covariance[j](f, 0, 0).real();
                if (!(c > 0.0) || !std::isfinite(c)) {
                    fail(ErrorCode::SingularMixCovariance,
                         "mixture power is not invertible at frame " + std::to_string(t) + ", bin " + std::to_string(f));
                }
                const Complex z = mix(0, t, f) / c;
                for (std::size_t j = 0; j < sources; ++j) {
                    out[j](0, t, f) = model.psd[j](0, t, f) * model.covariance[j](f, 0, 0).real() * z;
                }
                continue;
            }

            // Hermitian 2x2 mixture covariance [[c00, c01], [conj(c01), c11]].
            double c00 = eps;
            double c11 = eps;
            Complex c01 = 0.0;
            for (std::size_t j = 0; j < sources; ++j) {
                const double v = model.psd[j](0, t, f);
                const auto& r = model.covariance[j];
                c00 += v * r(f, 0, 0).real();
                c11 += v * r(f, 1, 1).real();
                c01 += v * r(f, 0, 1);
            }
            const double det = c00 * c11 - std::norm(c01);
            if (!(det > 0.0) || !std::isfinite(det)) {
                fail(ErrorCode::SingularMixCovariance, "mixture covariance is singular at frame " + std::to_string(t) +
                                                           ", bin " + std::to_string(f) + " (eps too small for input scale?)");
            }
            // Adjugate / determinant, applied to x directly.
            const Complex x0 = mix(0, t, f);
            const Complex x1 = mix(1, t, f);
            const Complex z0 = (c11 * x0 - c01 * x1) / det;
            const Complex z1 = (-std::conj(c01) * x0 + c00 * x1) / det;
            for (std::size_t j = 0; j < sources; ++j) {
                const double v = model.psd[j](0, t, f);
                const auto& r = model.covariance[j];
                out[j](0, t, f) = v * (r(f, 0, 0) * z0 + r(f, 0, 1) * z1);
                out[j](1, t, f) = v * (r(f, 1, 0) * z0 + r(f, 1, 1) * z1);
            }
        }
    }
    return out;
}

SourceSpectrogramSet em_iterate(std::span<const ComplexTensor> est, const ComplexTensor& mix, const MwfConfig& cfg,
                                std::vector<SpatialModel>* trace) {
    cfg.validate();
    check_estimates(est, mix);
    SourceSpectrogramSet current(est.begin(), est.end());
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        SpatialModel model = estimate_spatial_model(current, cfg.eps);
        current = apply_wiener_filter(model, mix, cfg.eps);
        if (trace != nullptr) trace->push_back(std::move(model));
    }
    return current;
}

SourceSpectrogramSet mwf(std::span<const RealTensor> mags, const ComplexTensor& mix, const MwfConfig& cfg) {
    cfg.validate();
    const SourceSpectrogramSet init = initial_estimates(mags, mix, cfg.mask_power);
    return em_iterate(init, mix, cfg);
}

}  // namespace dannasep
