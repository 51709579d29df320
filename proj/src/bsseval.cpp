#include "dannasep/bsseval.hpp"

#include "dannasep/error.hpp"
#include "dannasep/fft.hpp"
#include "dannasep/kernels.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <thread>

namespace dannasep {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double energy(std::span<const double> x) { return kernels::dot(x, x); }

}  // namespace

void EvalConfig::validate() const {
    if (filter_len < 1) fail(ErrorCode::InvalidConfig, "filter_len must be >= 1");
    if (!(win > 0.0) || !std::isfinite(win)) fail(ErrorCode::InvalidConfig, "evaluation window must be positive");
    if (!(hop > 0.0) || !std::isfinite(hop)) fail(ErrorCode::InvalidConfig, "evaluation hop must be positive");
}

struct ReferenceProjector::Impl {
    std::size_t sources = 0;
    std::size_t length = 0;
    std::size_t filter_len = 0;
    std::size_t padded = 0;
    FftPlan plan;
    std::vector<std::vector<Complex>> spectra;
    std::vector<double> energies;

    std::vector<std::optional<Eigen::LLT<Eigen::MatrixXd>>> own;
    std::optional<Eigen::LLT<Eigen::MatrixXd>> all;

    Impl(std::span<const std::span<const double>> refs, std::size_t flen)
        : sources(refs.size()),
          length(refs.empty() ? 0 : refs.front().size()),
          filter_len(flen),
          padded(length + flen - 1),
          plan(next_power_of_two(std::max<std::size_t>(2, length + flen - 1))),
          own(refs.size()) {
        spectra.reserve(sources);
        energies.reserve(sources);
        for (const auto& r : refs) {
            std::vector<Complex> s(plan.size());
            for (std::size_t i = 0; i < r.size(); ++i) s[i] = r[i];
            plan.forward(s);
            spectra.push_back(std::move(s));
            energies.push_back(energy(r));
        }
    }

    // c(l) = sum_u a(u) b(u + l), negative lags wrapped to the end.
    std::vector<double> correlate(const std::vector<Complex>& a, const std::vector<Complex>& b) const {
        std::vector<Complex> prod(plan.size());
        for (std::size_t k = 0; k < prod.size(); ++k) prod[k] = std::conj(a[k]) * b[k];
        plan.inverse(prod);
        std::vector<double> out(prod.size());
        for (std::size_t k = 0; k < prod.size(); ++k) out[k] = prod[k].real();
        return out;
    }

    double lag(const std::vector<double>& c, std::ptrdiff_t l) const {
        const auto n = static_cast<std::ptrdiff_t>(c.size());
        return c[static_cast<std::size_t>(((l % n) + n) % n)];
    }

    void fill_block(Eigen::MatrixXd& g, std::size_t i, std::size_t j, std::size_t row0, std::size_t col0) const {
        const auto c = correlate(spectra[i], spectra[j]);
        for (std::size_t a = 0; a < filter_len; ++a) {
            for (std::size_t b = 0; b < filter_len; ++b) {
                g(static_cast<Eigen::Index>(row0 + a), static_cast<Eigen::Index>(col0 + b)) =
                    lag(c, static_cast<std::ptrdiff_t>(a) - static_cast<std::ptrdiff_t>(b));
            }
        }
    }

    static Eigen::LLT<Eigen::MatrixXd> factor(Eigen::MatrixXd g) {
        const double reg = kGramRegularizer * g.trace() / static_cast<double>(g.rows());
        g.diagonal().array() += reg;
        Eigen::LLT<Eigen::MatrixXd> llt(g);
        if (llt.info() != Eigen::Success) {
            fail(ErrorCode::RankDeficient, "reference Gram matrix is singular even after regularization");
        }
        return llt;
    }

    const Eigen::LLT<Eigen::MatrixXd>& own_factor(std::size_t j) {
        if (!own[j]) {
            Eigen::MatrixXd g(filter_len, filter_len);
            fill_block(g, j, j, 0, 0);
            own[j] = factor(std::move(g));
        }
        return *own[j];
    }

    const Eigen::LLT<Eigen::MatrixXd>& all_factor() {
        if (!all) {
            const auto n = static_cast<Eigen::Index>(sources * filter_len);
            Eigen::MatrixXd g(n, n);
            for (std::size_t i = 0; i < sources; ++i) {
                for (std::size_t j = i; j < sources; ++j) {
                    fill_block(g, i, j, i * filter_len, j * filter_len);
                    if (i != j) {
                        g.block(static_cast<Eigen::Index>(j * filter_len), static_cast<Eigen::Index>(i * filter_len),
                                static_cast<Eigen::Index>(filter_len), static_cast<Eigen::Index>(filter_len)) =
                            g.block(static_cast<Eigen::Index>(i * filter_len),
                                    static_cast<Eigen::Index>(j * filter_len),
                                    static_cast<Eigen::Index>(filter_len), static_cast<Eigen::Index>(filter_len))
                                .transpose();
                    }
                }
            }
            all = factor(std::move(g));
        }
        return *all;
    }

    std::vector<Complex> spectrum_of(std::span<const double> x) const {
        if (x.size() != length) {
            fail(ErrorCode::LengthMismatch, "estimate has " + std::to_string(x.size()) +
                                                " samples, references have " + std::to_string(length));
        }
        std::vector<Complex> s(plan.size());
        for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i];
        plan.forward(s);
        return s;
    }

    // Solves for filters over `which` sources and returns sum_i h_i * s_i.
    std::vector<double> project(const std::vector<Complex>& est_spectrum, std::span<const std::size_t> which,
                                const Eigen::LLT<Eigen::MatrixXd>& llt) const {
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(which.size() * filter_len));
        for (std::size_t w = 0; w < which.size(); ++w) {
            const auto c = correlate(spectra[which[w]], est_spectrum);
            for (std::size_t a = 0; a < filter_len; ++a) rhs(static_cast<Eigen::Index>(w * filter_len + a)) = c[a];
        }
        const Eigen::VectorXd coeffs = llt.solve(rhs);

        std::vector<Complex> acc(plan.size());
        std::vector<Complex> h(plan.size());
        for (std::size_t w = 0; w < which.size(); ++w) {
            std::fill(h.begin(), h.end(), Complex{});
            for (std::size_t a = 0; a < filter_len; ++a) h[a] = coeffs(static_cast<Eigen::Index>(w * filter_len + a));
            plan.forward(h);
            const auto& s = spectra[which[w]];
            for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += h[k] * s[k];
        }
        plan.inverse(acc);
        std::vector<double> out(padded);
        for (std::size_t i = 0; i < padded; ++i) out[i] = acc[i].real();
        return out;
    }
};

ReferenceProjector::ReferenceProjector(std::span<const std::span<const double>> references, std::size_t filter_len) {
    if (references.empty()) fail(ErrorCode::EmptyInput, "no reference signals");
    if (filter_len < 1) fail(ErrorCode::InvalidConfig, "filter_len must be >= 1");
    for (std::size_t j = 1; j < references.size(); ++j) {
        if (references[j].size() != references.front().size()) {
            fail(ErrorCode::LengthMismatch, "reference " + std::to_string(j) + " length differs");
        }
    }
    if (references.front().empty()) fail(ErrorCode::EmptySignal, "references are empty");
    impl_ = std::make_unique<Impl>(references, filter_len);
}

ReferenceProjector::~ReferenceProjector() = default;
ReferenceProjector::ReferenceProjector(ReferenceProjector&&) noexcept = default;
ReferenceProjector& ReferenceProjector::operator=(ReferenceProjector&&) noexcept = default;

std::size_t ReferenceProjector::sources() const noexcept { return impl_->sources; }
std::size_t ReferenceProjector::length() const noexcept { return impl_->length; }
std::size_t ReferenceProjector::filter_len() const noexcept { return impl_->filter_len; }

std::vector<double> ReferenceProjector::project_own(std::span<const double> estimate, std::size_t source) const {
    if (source >= impl_->sources) fail(ErrorCode::InvalidArgument, "source index out of range");
    const auto spectrum = impl_->spectrum_of(estimate);
    if (impl_->energies[source] == 0.0) return std::vector<double>(padded_length(), 0.0);
    const std::size_t which[] = {source};
    return impl_->project(spectrum, which, impl_->own_factor(source));
}

std::vector<double> ReferenceProjector::project_all(std::span<const double> estimate) const {
    const auto spectrum = impl_->spectrum_of(estimate);
    std::vector<std::size_t> which(impl_->sources);
    for (std::size_t j = 0; j < which.size(); ++j) which[j] = j;
    if (std::all_of(impl_->energies.begin(), impl_->energies.end(), [](double e) { return e == 0.0; })) {
        return std::vector<double>(padded_length(), 0.0);
    }
    return impl_->project(spectrum, which, impl_->all_factor());
}

Decomposition ReferenceProjector::decompose(std::span<const double> estimate, std::size_t source) const {
    Decomposition d;
    d.s_target = project_own(estimate, source);
    const auto all = project_all(estimate);
    const std::size_t n = padded_length();
    d.e_interf.resize(n);
    d.e_artif.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double e = i < estimate.size() ? estimate[i] : 0.0;
        d.e_interf[i] = all[i] - d.s_target[i];
        d.e_artif[i] = e - all[i];
    }
    return d;
}

Decomposition project_subspace(std::span<const std::span<const double>> references, std::span<const double> estimate,
                               std::size_t source, std::size_t filter_len) {
    if (source >= references.size()) fail(ErrorCode::InvalidArgument, "source index out of range");
    for (const auto& r : references) {
        if (r.size() != estimate.size()) {
            fail(ErrorCode::LengthMismatch, "reference and estimate lengths differ (" + std::to_string(r.size()) +
                                                " vs " + std::to_string(estimate.size()) + ")");
        }
    }
    if (std::all_of(references[source].begin(), references[source].end(), [](double x) { return x == 0.0; })) {
        fail(ErrorCode::SilentReference, "reference of source " + std::to_string(source) + " is identically zero");
    }
    const ReferenceProjector projector(references, filter_len);
    return projector.decompose(estimate, source);
}

double sdr_from_energies(double target_energy, double error_energy) noexcept {
    if (error_energy <= 0.0) return kSdrCapDb;
    if (target_energy <= 0.0) return -kSdrCapDb;
    return std::clamp(10.0 * std::log10(target_energy / error_energy), -kSdrCapDb, kSdrCapDb);
}

FrameLayout frame_layout(std::size_t length, int sample_rate, const EvalConfig& cfg) {
    cfg.validate();
    FrameLayout layout;
    layout.win = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.win * sample_rate)));
    layout.hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.hop * sample_rate)));
    if (length <= layout.win) {
        layout.win = length;
        layout.frames = length == 0 ? 0 : 1;
    } else {
        layout.frames = (length - layout.win) / layout.hop + 1;
    }
    return layout;
}

double nan_median(std::span<const double> values) {
    std::vector<double> kept;
    kept.reserve(values.size());
    for (double v : values) {
        if (!std::isnan(v)) kept.push_back(v);
    }
    if (kept.empty()) return kNaN;
    std::sort(kept.begin(), kept.end());
    const std::size_t mid = kept.size() / 2;
    return kept.size() % 2 == 1 ? kept[mid] : 0.5 * (kept[mid - 1] + kept[mid]);
}

namespace {

void check_eval_inputs(std::span<const Waveform> references, std::span<const Waveform> estimates) {
    if (references.empty()) fail(ErrorCode::EmptyInput, "no references");
    if (references.size() != estimates.size()) {
        fail(ErrorCode::ShapeMismatch, std::to_string(references.size()) + " references but " +
                                           std::to_string(estimates.size()) + " estimates");
    }
    const Waveform& first = references.front();
    for (std::size_t j = 0; j < references.size(); ++j) {
        for (const Waveform* w : {&references[j], &estimates[j]}) {
            if (w->length() != first.length()) {
                fail(ErrorCode::LengthMismatch, "source " + std::to_string(j) + " has " + std::to_string(w->length()) +
                                                    " samples, expected " + std::to_string(first.length()));
            }
            if (w->channels() != first.channels()) {
                fail(ErrorCode::ShapeMismatch, "source " + std::to_string(j) + " has " +
                                                   std::to_string(w->channels()) + " channels, expected " +
                                                   std::to_string(first.channels()));
            }
            if (w->sample_rate() != first.sample_rate()) {
                fail(ErrorCode::SampleRateMismatch, "source " + std::to_string(j) + " sample rate differs");
            }
        }
    }
}

void evaluate_frame(std::span<const Waveform> references, std::span<const Waveform> estimates,
                    const FrameLayout& layout, std::size_t frame, std::size_t filter_len,
                    std::vector<std::vector<double>>& out) {
    const std::size_t sources = references.size();
    const std::size_t channels = references.front().channels();
    const std::size_t start = layout.start(frame);

    std::vector<double> ref_energy(sources, 0.0);
    std::vector<double> target(sources, 0.0);
    std::vector<double> error(sources, 0.0);
    std::vector<bool> identical(sources, true);

    for (std::size_t c = 0; c < channels; ++c) {
        std::vector<std::span<const double>> refs;
        refs.reserve(sources);
        for (const auto& r : references) refs.push_back(r.channel(c).subspan(start, layout.win));
        const ReferenceProjector projector(refs, filter_len);

        for (std::size_t j = 0; j < sources; ++j) {
            const auto est = estimates[j].channel(c).subspan(start, layout.win);
            ref_energy[j] += energy(refs[j]);
            if (!std::equal(est.begin(), est.end(), refs[j].begin())) identical[j] = false;

            const auto s_target = projector.project_own(est, j);
            std::vector<double> padded(projector.padded_length(), 0.0);
            std::copy(est.begin(), est.end(), padded.begin());
            target[j] += energy(s_target);
            error[j] += kernels::sum_sq_diff(padded, s_target);
        }
    }

    for (std::size_t j = 0; j < sources; ++j) {
        if (ref_energy[j] < kSilentFrameEnergy) {
            out[j][frame] = kNaN;
        } else if (identical[j]) {
            out[j][frame] = kSdrCapDb;
        } else {
            out[j][frame] = sdr_from_energies(target[j], error[j]);
        }
    }
}

}  // namespace

SdrReport sdr_frames(std::span<const Waveform> references, std::span<const Waveform> estimates,
                     const EvalConfig& cfg, std::size_t threads) {
    cfg.validate();
    check_eval_inputs(references, estimates);
    const Waveform& first = references.front();
    if (first.length() == 0) fail(ErrorCode::EmptySignal, "cannot evaluate empty signals");

    const FrameLayout layout = frame_layout(first.length(), first.sample_rate(), cfg);
    const std::size_t sources = references.size();

    SdrReport report;
    for (std::size_t j = 0; j < sources; ++j) {
        report.sources.emplace_back(j < kNumSources ? std::string(kSourceNames[j]) : "source" + std::to_string(j));
    }
    report.frames.assign(sources, std::vector<double>(layout.frames, kNaN));

    const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, layout.frames));
    if (workers == 1) {
        for (std::size_t t = 0; t < layout.frames; ++t) {
            evaluate_frame(references, estimates, layout, t, cfg.filter_len, report.frames);
        }
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t t = w; t < layout.frames; t += workers) {
                        evaluate_frame(references, estimates, layout, t, cfg.filter_len, report.frames);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    double sum = 0.0;
    for (std::size_t j = 0; j < sources; ++j) {
        report.medians.push_back(nan_median(report.frames[j]));
        sum += report.medians.back();
    }
    report.overall_avg = sum / static_cast<double>(sources);
    return report;
}

SdrReport aggregate(std::span<const SdrReport> reports) {
    if (reports.empty()) fail(ErrorCode::EmptyInput, "no reports to aggregate");
    const std::size_t sources = reports.front().medians.size();
    for (const auto& r : reports) {
        if (r.medians.size() != sources) fail(ErrorCode::ShapeMismatch, "reports cover different source counts");
    }
    SdrReport out;
    out.sources = reports.front().sources;
    double sum = 0.0;
    for (std::size_t j = 0; j < sources; ++j) {
        std::vector<double> track_medians;
        track_medians.reserve(reports.size());
        for (const auto& r : reports) track_medians.push_back(r.medians[j]);
        out.medians.push_back(nan_median(track_medians));
        sum += out.medians.back();
    }
    out.overall_avg = sources == 0 ? kNaN : sum / static_cast<double>(sources);
    return out;
}

}  // namespace dannasep
