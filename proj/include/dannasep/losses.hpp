#pragma once

#include "dannasep/tensor.hpp"
#include "dannasep/waveform.hpp"

#include <span>
#include <vector>

namespace dannasep {

/// Per-source complex spectrograms in source order (drums, bass, other, vocals).
using SourceSpectrogramSet = std::vector<ComplexTensor>;

/// Sum over sources, channels, frames and bins of |Y - Yhat|^2.
double freq_mse(std::span<const ComplexTensor> truth, std::span<const ComplexTensor> est);

/// Wirtinger gradient dL/dYhat* = Yhat - Y, one tensor per source. The
/// directional derivative along d is 2 Re<grad, d>.
SourceSpectrogramSet freq_mse_grad(std::span<const ComplexTensor> truth, std::span<const ComplexTensor> est);

/// Sum over sources and samples of |y - yhat|.
double l1_waveform(std::span<const Waveform> truth, std::span<const Waveform> est);

inline constexpr double kCosineEps = 1e-8;

/// Negative cosine similarity summed over sources; in [-J, J].
double time_domain_loss(std::span<const Waveform> truth, std::span<const Waveform> est);

inline constexpr double kDefaultMixWeight = 0.5;

/// mix_weight * freq_mse + (1 - mix_weight) * time_domain_loss.
double combined_loss(std::span<const ComplexTensor> truth_tf, std::span<const ComplexTensor> est_tf,
                     std::span<const Waveform> truth_t, std::span<const Waveform> est_t,
                     double mix_weight = kDefaultMixWeight);

}  // namespace dannasep
