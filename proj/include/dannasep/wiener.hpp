#pragma once

#include "dannasep/losses.hpp"
#include "dannasep/tensor.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace dannasep {

struct MwfConfig {
    std::size_t iterations = 1;  // EM passes after the soft-mask initialization
    double eps = 1e-10;          // absolute regularizer on the mixture covariance
    double mask_power = 2.0;     // exponent applied to magnitudes for the initial mask

    void validate() const;
};

/// Per-bin spatial covariance matrices (channels x channels) of one source.
class SpatialCovariance {
public:
    SpatialCovariance() = default;
    SpatialCovariance(std::size_t channels, std::size_t bins)
        : channels_(channels), bins_(bins), data_(channels * channels * bins) {}

    std::size_t channels() const noexcept { return channels_; }
    std::size_t bins() const noexcept { return bins_; }

    Complex& operator()(std::size_t f, std::size_t a, std::size_t b) noexcept {
        return data_[(f * channels_ + a) * channels_ + b];
    }
    Complex operator()(std::size_t f, std::size_t a, std::size_t b) const noexcept {
        return data_[(f * channels_ + a) * channels_ + b];
    }

private:
    std::size_t channels_ = 0;
    std::size_t bins_ = 0;
    std::vector<Complex> data_;
};

/// Per-source power spectral densities v_j(t, f) (stored with a single
/// channel) and spatial covariances R_j(f).
struct SpatialModel {
    std::vector<RealTensor> psd;
    std::vector<SpatialCovariance> covariance;
};

/// Soft-mask initialization: yhat_j = v_j^a / (sum_k v_k^a + 1e-12) * x,
/// per channel, with v_j the given magnitudes.
SourceSpectrogramSet initial_estimates(std::span<const RealTensor> mags, const ComplexTensor& mix,
                                       double mask_power);

/// Fits the PSDs and Hermitian spatial covariances to the current estimates.
SpatialModel estimate_spatial_model(std::span<const ComplexTensor> est, double eps);

/// yhat_j = v_j R_j (sum_k v_k R_k + eps I)^-1 x for every (t, f).
SourceSpectrogramSet apply_wiener_filter(const SpatialModel& model, const ComplexTensor& mix, double eps);

/// cfg.iterations rounds of (estimate_spatial_model, apply_wiener_filter).
/// When `trace` is given, every fitted model is appended to it.
SourceSpectrogramSet em_iterate(std::span<const ComplexTensor> est, const ComplexTensor& mix,
                                const MwfConfig& cfg, std::vector<SpatialModel>* trace = nullptr);

/// initial_estimates followed by em_iterate.
SourceSpectrogramSet mwf(std::span<const RealTensor> mags, const ComplexTensor& mix, const MwfConfig& cfg);

}  // namespace dannasep
