#include "dannasep/blend.hpp"

#include "dannasep/bsseval.hpp"
#include "dannasep/error.hpp"
#include "dannasep/kernels.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace dannasep {

namespace {

std::vector<std::string> default_model_names(std::size_t n) {
    std::vector<std::string> names;
    for (std::size_t m = 0; m < n; ++m) names.push_back("model" + std::to_string(m));
    return names;
}

std::vector<std::string> default_source_names(std::size_t n) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < n; ++j) {
        names.emplace_back(j < kNumSources ? std::string(kSourceNames[j]) : "source" + std::to_string(j));
    }
    return names;
}

void check_stem_sets(std::span<const SourceWaveformSet> per_model_stems) {
    if (per_model_stems.empty()) fail(ErrorCode::EmptyInput, "no model outputs to blend");
    const auto& first_set = per_model_stems.front();
    if (first_set.empty()) fail(ErrorCode::EmptyInput, "model 0 produced no stems");
    const Waveform& ref = first_set.front();
    for (std::size_t m = 0; m < per_model_stems.size(); ++m) {
        const auto& set = per_model_stems[m];
        if (set.size() != first_set.size()) {
            fail(ErrorCode::ShapeMismatch, "model " + std::to_string(m) + " has " + std::to_string(set.size()) +
                                               " stems, model 0 has " + std::to_string(first_set.size()));
        }
        for (std::size_t j = 0; j < set.size(); ++j) {
            if (!set[j].same_shape(ref)) {
                fail(ErrorCode::ShapeMismatch, "model " + std::to_string(m) + " stem " + std::to_string(j) +
                                                   " differs in shape from model 0");
            }
            if (set[j].sample_rate() != ref.sample_rate()) {
                fail(ErrorCode::SampleRateMismatch, "model " + std::to_string(m) + " stem " + std::to_string(j) +
                                                        " has sample rate " + std::to_string(set[j].sample_rate()) +
                                                        ", expected " + std::to_string(ref.sample_rate()));
            }
        }
    }
}

Waveform blend_source(std::span<const SourceWaveformSet> stems, std::size_t source,
                      std::span<const double> column) {
    const Waveform& shape = stems.front()[source];
    Waveform out(shape.channels(), shape.length(), shape.sample_rate());
    for (std::size_t m = 0; m < stems.size(); ++m) kernels::axpy(column[m], stems[m][source].samples(), out.samples());
    return out;
}

void check_references(std::span<const SourceWaveformSet> stems, const SourceWaveformSet& references) {
    check_stem_sets(stems);
    if (references.size() != stems.front().size()) {
        fail(ErrorCode::ShapeMismatch, std::to_string(references.size()) + " references for " +
                                           std::to_string(stems.front().size()) + " stems");
    }
    for (std::size_t j = 0; j < references.size(); ++j) {
        if (references[j].length() != stems.front()[j].length()) {
            fail(ErrorCode::LengthMismatch, "reference " + std::to_string(j) + " length differs from the stems");
        }
        if (!references[j].same_shape(stems.front()[j])) {
            fail(ErrorCode::ShapeMismatch, "reference " + std::to_string(j) + " channel count differs from the stems");
        }
        if (references[j].sample_rate() != stems.front()[j].sample_rate()) {
            fail(ErrorCode::SampleRateMismatch, "reference " + std::to_string(j) + " sample rate differs");
        }
    }
}

std::vector<double> to_weights(const std::vector<std::size_t>& cells, std::size_t divisions) {
    std::vector<double> w(cells.size());
    for (std::size_t m = 0; m < cells.size(); ++m) {
        w[m] = static_cast<double>(cells[m]) / static_cast<double>(divisions);
    }
    return w;
}

// Grid argmax with the lexicographic tie-break: grid is enumerated in
// lexicographic order and only a strictly better score replaces the best.
template <class Score>
std::vector<double> best_column(const std::vector<std::vector<std::size_t>>& grid, std::size_t divisions,
                                Score&& score) {
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double s = score(to_weights(grid[g], divisions));
        if (std::isnan(s)) continue;
        if (!found || s > best_score) {
            best = g;
            best_score = s;
            found = true;
        }
    }
    return to_weights(grid[best], divisions);
}

BlendWeights assemble(const std::vector<std::vector<double>>& columns, std::size_t models,
                      std::vector<std::string> model_names) {
    std::vector<std::vector<double>> rows(models, std::vector<double>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        for (std::size_t m = 0; m < models; ++m) rows[m][j] = columns[j][m];
    }
    return validate_weights(std::move(rows), std::move(model_names));
}

}  // namespace

BlendWeights validate_weights(std::vector<std::vector<double>> raw, std::vector<std::string> model_names,
                              std::vector<std::string> source_names) {
    if (raw.empty() || raw.front().empty()) fail(ErrorCode::EmptyInput, "weight matrix is empty");
    const std::size_t sources = raw.front().size();
    for (std::size_t m = 0; m < raw.size(); ++m) {
        if (raw[m].size() != sources) {
            fail(ErrorCode::ShapeMismatch, "weight row " + std::to_string(m) + " has " + std::to_string(raw[m].size()) +
                                               " entries, expected " + std::to_string(sources));
        }
    }
    if (model_names.empty()) model_names = default_model_names(raw.size());
    if (source_names.empty()) source_names = default_source_names(sources);
    if (model_names.size() != raw.size()) {
        fail(ErrorCode::ModelCountMismatch, std::to_string(model_names.size()) + " model names for " +
                                                std::to_string(raw.size()) + " weight rows");
    }
    if (source_names.size() != sources) {
        fail(ErrorCode::ShapeMismatch, std::to_string(source_names.size()) + " source names for " +
                                           std::to_string(sources) + " weight columns");
    }

    for (std::size_t m = 0; m < raw.size(); ++m) {
        for (std::size_t j = 0; j < sources; ++j) {
            const double w = raw[m][j];
            if (!std::isfinite(w)) {
                fail(ErrorCode::InvalidArgument, "weight for model '" + model_names[m] + "', source '" +
                                                     source_names[j] + "' is not finite");
            }
            if (w < 0.0) {
                std::ostringstream msg;
                msg << "weight " << w << " for model '" << model_names[m] << "', source '" << source_names[j]
                    << "' is negative";
                fail(ErrorCode::NegativeWeight, msg.str());
            }
        }
    }
    for (std::size_t j = 0; j < sources; ++j) {
        double sum = 0.0;
        for (const auto& row : raw) sum += row[j];
        if (std::fabs(sum - 1.0) > kWeightColumnTolerance) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "weights for source '" << source_names[j] << "' sum to " << sum << ", expected 1";
            fail(ErrorCode::ColumnSumViolation, msg.str());
        }
    }

    BlendWeights out;
    out.rows_ = std::move(raw);
    out.model_names_ = std::move(model_names);
    out.source_names_ = std::move(source_names);
    return out;
}

BlendWeights default_blend_weights() {
    return validate_weights({{0.2, 0.1, 0.0, 0.2}, {0.2, 0.17, 0.5, 0.4}, {0.6, 0.73, 0.5, 0.4}},
                            {"X-UMX", "U-Net", "Demucs"}, {"drums", "bass", "other", "vocals"});
}

SourceWaveformSet blend(std::span<const SourceWaveformSet> per_model_stems, const BlendWeights& weights) {
    if (per_model_stems.size() != weights.models()) {
        fail(ErrorCode::ModelCountMismatch, std::to_string(per_model_stems.size()) + " model outputs for " +
                                                std::to_string(weights.models()) + " weight rows");
    }
    check_stem_sets(per_model_stems);
    if (per_model_stems.front().size() != weights.sources()) {
        fail(ErrorCode::ShapeMismatch, std::to_string(per_model_stems.front().size()) + " stems per model but " +
                                           std::to_string(weights.sources()) + " weight columns");
    }
    SourceWaveformSet fused;
    fused.reserve(weights.sources());
    std::vector<double> column(weights.models());
    for (std::size_t j = 0; j < weights.sources(); ++j) {
        for (std::size_t m = 0; m < weights.models(); ++m) column[m] = weights(m, j);
        fused.push_back(blend_source(per_model_stems, j, column));
    }
    return fused;
}

BlendMetric median_sdr_metric(const SourceWaveformSet& references, const EvalConfig& cfg) {
    return [&references, cfg](std::size_t source, const Waveform& blended) {
        const Waveform refs[] = {references.at(source)};
        const Waveform ests[] = {blended};
        return sdr_frames(refs, ests, cfg).medians.front();
    };
}

std::size_t grid_divisions(double grid_step) {
    if (!(grid_step > 0.0) || grid_step > 1.0 || !std::isfinite(grid_step)) {
        fail(ErrorCode::InvalidGridStep, "grid step must lie in (0, 1], got " + std::to_string(grid_step));
    }
    const double cells = 1.0 / grid_step;
    const double rounded = std::round(cells);
    if (std::fabs(cells - rounded) > 1e-9 * std::max(1.0, rounded)) {
        fail(ErrorCode::InvalidGridStep, "grid step " + std::to_string(grid_step) + " does not divide 1 evenly");
    }
    return static_cast<std::size_t>(rounded);
}

std::vector<std::vector<std::size_t>> simplex_grid(std::size_t models, std::size_t divisions) {
    std::vector<std::vector<std::size_t>> grid;
    if (models == 0) return grid;
    std::vector<std::size_t> current(models, 0);
    // Depth-first over leading coordinates, ascending, so the output is in
    // lexicographic order; the last coordinate takes the remainder.
    auto recurse = [&](auto&& self, std::size_t index, std::size_t remaining) -> void {
        if (index + 1 == models) {
            current[index] = remaining;
            grid.push_back(current);
            return;
        }
        for (std::size_t k = 0; k <= remaining; ++k) {
            current[index] = k;
            self(self, index + 1, remaining - k);
        }
    };
    recurse(recurse, 0, divisions);
    return grid;
}

BlendWeights search_weights(std::span<const SourceWaveformSet> per_model_stems, const SourceWaveformSet& references,
                            double grid_step, const BlendMetric& metric, std::vector<std::string> model_names) {
    check_references(per_model_stems, references);
    const std::size_t divisions = grid_divisions(grid_step);
    const std::size_t models = per_model_stems.size();
    const auto grid = simplex_grid(models, divisions);

    std::vector<std::vector<double>> columns;
    for (std::size_t j = 0; j < references.size(); ++j) {
        columns.push_back(best_column(grid, divisions, [&](const std::vector<double>& w) {
            return metric(j, blend_source(per_model_stems, j, w));
        }));
    }
    return assemble(columns, models, std::move(model_names));
}

BlendWeights search_weights_sdr(std::span<const SourceWaveformSet> per_model_stems,
                                const SourceWaveformSet& references, double grid_step, const EvalConfig& cfg,
                                std::vector<std::string> model_names) {
    cfg.validate();
    check_references(per_model_stems, references);
    const std::size_t divisions = grid_divisions(grid_step);
    const std::size_t models = per_model_stems.size();
    const auto grid = simplex_grid(models, divisions);
    const Waveform& shape = references.front();
    const FrameLayout layout = frame_layout(shape.length(), shape.sample_rate(), cfg);

    std::vector<std::vector<double>> columns;
    for (std::size_t j = 0; j < references.size(); ++j) {
        // Per frame: target Gram A[m][n] = <P s_m, P s_n>, error Gram
        // B[m][n] = <s_m - P s_m, s_n - P s_n>, summed over channels.
        struct FrameForms {
            bool silent = false;
            std::vector<double> target;
            std::vector<double> error;
        };
        std::vector<FrameForms> forms(layout.frames);
        for (std::size_t t = 0; t < layout.frames; ++t) {
            FrameForms& ff = forms[t];
            ff.target.assign(models * models, 0.0);
            ff.error.assign(models * models, 0.0);
            double ref_energy = 0.0;
            for (std::size_t c = 0; c < shape.channels(); ++c) {
                const auto ref = references[j].channel(c).subspan(layout.start(t), layout.win);
                ref_energy += kernels::dot(ref, ref);
                const std::span<const double> refs[] = {ref};
                const ReferenceProjector projector(refs, cfg.filter_len);
                std::vector<std::vector<double>> proj(models);
                std::vector<std::vector<double>> resid(models);
                for (std::size_t m = 0; m < models; ++m) {
                    const auto est = per_model_stems[m][j].channel(c).subspan(layout.start(t), layout.win);
                    proj[m] = projector.project_own(est, 0);
                    resid[m].assign(projector.padded_length(), 0.0);
                    std::copy(est.begin(), est.end(), resid[m].begin());
                    kernels::axpy(-1.0, proj[m], resid[m]);
                }
                for (std::size_t m = 0; m < models; ++m) {
                    for (std::size_t n = 0; n < models; ++n) {
                        ff.target[m * models + n] += kernels::dot(proj[m], proj[n]);
                        ff.error[m * models + n] += kernels::dot(resid[m], resid[n]);
                    }
                }
            }
            ff.silent = ref_energy < kSilentFrameEnergy;
        }

        auto quadratic = [models](const std::vector<double>& form, const std::vector<double>& w) {
            double acc = 0.0;
            for (std::size_t m = 0; m < models; ++m) {
                for (std::size_t n = 0; n < models; ++n) acc += w[m] * form[m * models + n] * w[n];
            }
            return acc;
        };

        columns.push_back(best_column(grid, divisions, [&](const std::vector<double>& w) {
            std::vector<double> sdr(layout.frames);
            for (std::size_t t = 0; t < layout.frames; ++t) {
                sdr[t] = forms[t].silent ? std::numeric_limits<double>::quiet_NaN()
                                         : sdr_from_energies(quadratic(forms[t].target, w),
                                                             std::max(0.0, quadratic(forms[t].error, w)));
            }
            return nan_median(sdr);
        }));
    }
    return assemble(columns, models, std::move(model_names));
}

}  // namespace dannasep
