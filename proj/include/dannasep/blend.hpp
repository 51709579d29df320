#pragma once

#include "dannasep/waveform.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace dannasep {

struct EvalConfig;

inline constexpr double kWeightColumnTolerance = 1e-6;

/// Model x source nonnegative matrix whose source columns each sum to one.
/// Only obtainable through validate_weights.
class BlendWeights {
public:
    std::size_t models() const noexcept { return rows_.size(); }
    std::size_t sources() const noexcept { return rows_.empty() ? 0 : rows_.front().size(); }
    double operator()(std::size_t model, std::size_t source) const { return rows_.at(model).at(source); }

    const std::vector<std::vector<double>>& rows() const noexcept { return rows_; }
    const std::vector<std::string>& model_names() const noexcept { return model_names_; }
    const std::vector<std::string>& source_names() const noexcept { return source_names_; }

    friend BlendWeights validate_weights(std::vector<std::vector<double>> raw, std::vector<std::string> model_names,
                                         std::vector<std::string> source_names);

private:
    std::vector<std::vector<double>> rows_;
    std::vector<std::string> model_names_;
    std::vector<std::string> source_names_;
};

/// Accepts `raw` (rows = models) iff it is rectangular, finite, nonnegative,
/// and each column sums to 1 within 1e-6. Never renormalizes. Empty name
/// lists are filled with defaults (model0.., drums/bass/other/vocals).
BlendWeights validate_weights(std::vector<std::vector<double>> raw, std::vector<std::string> model_names = {},
                              std::vector<std::string> source_names = {});

/// Weights of the three-model fusion for (drums, bass, other, vocals):
/// X-UMX (0.2, 0.1, 0, 0.2), U-Net (0.2, 0.17, 0.5, 0.4), Demucs (0.6, 0.73, 0.5, 0.4).
BlendWeights default_blend_weights();

/// fused_j = sum_m w[m][j] * stems[m][j], sample-wise.
SourceWaveformSet blend(std::span<const SourceWaveformSet> per_model_stems, const BlendWeights& weights);

/// Scores one blended stem for source `source` (higher is better).
using BlendMetric = std::function<double(std::size_t source, const Waveform& blended)>;

/// Metric returning the median framewise SDR of the blended stem against
/// references[source]. `references` must outlive the metric.
BlendMetric median_sdr_metric(const SourceWaveformSet& references, const EvalConfig& cfg);

/// Number of grid cells per unit for `grid_step`; throws InvalidGridStep
/// unless 1/grid_step is an integer (within 1e-9).
std::size_t grid_divisions(double grid_step);

/// Every weight column on the simplex grid, in lexicographic order, as
/// integer cell counts summing to `divisions`.
std::vector<std::vector<std::size_t>> simplex_grid(std::size_t models, std::size_t divisions);

/// Exhaustive per-source search over the simplex grid. Each source column is
/// the grid point maximizing `metric`; ties go to the lexicographically
/// smallest column. NaN scores never win.
BlendWeights search_weights(std::span<const SourceWaveformSet> per_model_stems, const SourceWaveformSet& references,
                            double grid_step, const BlendMetric& metric,
                            std::vector<std::string> model_names = {});

/// Same search with median framewise SDR as the objective, evaluated through
/// the linearity of the projections: each model's stem is decomposed once
/// per frame and every grid point reduces to a ratio of quadratic forms.
BlendWeights search_weights_sdr(std::span<const SourceWaveformSet> per_model_stems,
                                const SourceWaveformSet& references, double grid_step, const EvalConfig& cfg,
                                std::vector<std::string> model_names = {});

}  // namespace dannasep
