#pragma once

#include "dannasep/waveform.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace dannasep {

struct EvalConfig {
    std::size_t filter_len = 512;  // distortion filter taps
    double win = 1.0;              // seconds
    double hop = 1.0;              // seconds

    void validate() const;
};

inline constexpr double kSdrCapDb = 300.0;
inline constexpr double kSilentFrameEnergy = 1e-12;
inline constexpr double kGramRegularizer = 1e-10;

/// Components of an estimate, each of length n + filter_len - 1 (the
/// estimate is zero-padded to that length). s_target + e_interf + e_artif
/// equals the padded estimate.
struct Decomposition {
    std::vector<double> s_target;
    std::vector<double> e_interf;
    std::vector<double> e_artif;
};

/// Least-squares projections onto delayed copies of a fixed set of mono
/// references. Gram matrices are assembled from FFT cross-correlations
/// (they are block Toeplitz) and factored once, then reused for every
/// estimate. Factorizations are computed lazily; an instance must not be
/// shared between threads.
class ReferenceProjector {
public:
    ReferenceProjector(std::span<const std::span<const double>> references, std::size_t filter_len);
    ~ReferenceProjector();
    ReferenceProjector(ReferenceProjector&&) noexcept;
    ReferenceProjector& operator=(ReferenceProjector&&) noexcept;

    std::size_t sources() const noexcept;
    std::size_t length() const noexcept;
    std::size_t filter_len() const noexcept;
    std::size_t padded_length() const noexcept { return length() + filter_len() - 1; }

    /// Projection onto the delayed copies of references[source] alone. A
    /// silent reference projects everything to zero.
    std::vector<double> project_own(std::span<const double> estimate, std::size_t source) const;

    /// Projection onto the delayed copies of all references.
    std::vector<double> project_all(std::span<const double> estimate) const;

    Decomposition decompose(std::span<const double> estimate, std::size_t source) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Decomposition of `estimate` with respect to references[source].
/// Throws SilentReference, LengthMismatch, RankDeficient.
Decomposition project_subspace(std::span<const std::span<const double>> references, std::span<const double> estimate,
                               std::size_t source, std::size_t filter_len);

/// 10 log10(num / den) clamped to [-300, 300]; den == 0 gives +300.
double sdr_from_energies(double target_energy, double error_energy) noexcept;

struct FrameLayout {
    std::size_t win = 0;  // samples
    std::size_t hop = 0;  // samples
    std::size_t frames = 0;

    std::size_t start(std::size_t frame) const noexcept { return frame * hop; }
};

/// Non-overlapping (for win == hop) analysis windows. Incomplete trailing
/// windows are dropped; a signal shorter than one window is a single frame.
FrameLayout frame_layout(std::size_t length, int sample_rate, const EvalConfig& cfg);

struct SdrReport {
    std::vector<std::string> sources;
    std::vector<std::vector<double>> frames;  // NaN marks an excluded (silent-reference) frame
    std::vector<double> medians;              // NaN when every frame is excluded
    double overall_avg = 0.0;
};

/// Median of the non-NaN entries (mean of the middle pair for even counts);
/// NaN if none.
double nan_median(std::span<const double> values);

/// Framewise SDR of each estimate against its reference. Multichannel
/// signals are projected per channel; target and error energies are summed
/// over channels before the ratio.
SdrReport sdr_frames(std::span<const Waveform> references, std::span<const Waveform> estimates,
                     const EvalConfig& cfg, std::size_t threads = 1);

/// Per-source median over track medians; overall_avg is their mean. The
/// returned report has no frame arrays.
SdrReport aggregate(std::span<const SdrReport> reports);

}  // namespace dannasep
