#include "dannasep/losses.hpp"

#include "dannasep/error.hpp"
#include "dannasep/kernels.hpp"

#include <cmath>
#include <string>

namespace dannasep {

namespace {

std::span<const double> as_reals(std::span<const Complex> z) {
    return {reinterpret_cast<const double*>(z.data()), 2 * z.size()};
}

void check_pairs(std::span<const ComplexTensor> truth, std::span<const ComplexTensor> est) {
    if (truth.size() != est.size()) {
        fail(ErrorCode::ShapeMismatch, "truth has " + std::to_string(truth.size()) + " sources, estimate has " +
                                           std::to_string(est.size()));
    }
    for (std::size_t j = 0; j < truth.size(); ++j) {
        if (!(truth[j].shape() == est[j].shape()) || !(truth[j].shape() == truth.front().shape())) {
            fail(ErrorCode::ShapeMismatch, "spectrogram shapes differ at source " + std::to_string(j));
        }
    }
}

void check_pairs(std::span<const Waveform> truth, std::span<const Waveform> est) {
    if (truth.size() != est.size()) {
        fail(ErrorCode::ShapeMismatch, "truth has " + std::to_string(truth.size()) + " sources, estimate has " +
                                           std::to_string(est.size()));
    }
    for (std::size_t j = 0; j < truth.size(); ++j) {
        if (!truth[j].same_shape(est[j]) || !truth[j].same_shape(truth.front())) {
            fail(ErrorCode::ShapeMismatch, "waveform shapes differ at source " + std::to_string(j));
        }
    }
}

}  // namespace

double freq_mse(std::span<const ComplexTensor> truth, std::span<const ComplexTensor> est) {
    check_pairs(truth, est);
    double total = 0.0;
    for (std::size_t j = 0; j < truth.size(); ++j) {
        total += kernels::sum_sq_diff(as_reals(truth[j].data()), as_reals(est[j].data()));
    }
    return total;
}

SourceSpectrogramSet freq_mse_grad(std::span<const ComplexTensor> truth, std::span<const ComplexTensor> est) {
    check_pairs(truth, est);
    SourceSpectrogramSet grad;
    grad.reserve(est.size());
    for (std::size_t j = 0; j < est.size(); ++j) {
        ComplexTensor g = est[j];
        auto gd = g.data();
        const auto yd = truth[j].data();
        for (std::size_t i = 0; i < gd.size(); ++i) gd[i] -= yd[i];
        grad.push_back(std::move(g));
    }
    return grad;
}

double l1_waveform(std::span<const Waveform> truth, std::span<const Waveform> est) {
    check_pairs(truth, est);
    double total = 0.0;
    for (std::size_t j = 0; j < truth.size(); ++j) {
        total += kernels::sum_abs_diff(truth[j].samples(), est[j].samples());
    }
    return total;
}

double time_domain_loss(std::span<const Waveform> truth, std::span<const Waveform> est) {
    check_pairs(truth, est);
    double total = 0.0;
    for (std::size_t j = 0; j < truth.size(); ++j) {
        const auto y = truth[j].samples();
        const auto yh = est[j].samples();
        const double inner = kernels::dot(y, yh);
        const double norms = std::sqrt(kernels::dot(y, y)) * std::sqrt(kernels::dot(yh, yh));
        total -= inner / (norms + kCosineEps);
    }
    return total;
}

double combined_loss(std::span<const ComplexTensor> truth_tf, std::span<const ComplexTensor> est_tf,
                     std::span<const Waveform> truth_t, std::span<const Waveform> est_t, double mix_weight) {
    if (!(mix_weight >= 0.0 && mix_weight <= 1.0)) {
        fail(ErrorCode::InvalidArgument, "mix_weight must lie in [0, 1], got " + std::to_string(mix_weight));
    }
    const double tf = freq_mse(truth_tf, est_tf);
    const double t = time_domain_loss(truth_t, est_t);
    return mix_weight * tf + (1.0 - mix_weight) * t;
}

}  // namespace dannasep
