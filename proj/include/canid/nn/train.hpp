#pragma once
// One optimization step's loss-and-gradient assembly. Every strategy's batch
// loss routes through compute_loss_and_grad so the production gradient path
// is exactly the code the finite-difference checks exercise.

#include <vector>

#include "canid/nn/kernels.hpp"

namespace canid::nn {

template <typename T>
struct EwcBundleView {
    const T* importance = nullptr; // per-parameter, >= 0
    const T* anchor = nullptr;     // parameter vector snapshot
};

template <typename T>
struct StepInputs {
    // composed classification batch (labels are head-unit indices)
    const T* x = nullptr;
    int batch = 0;
    const int* labels = nullptr;

    // distillation toward frozen-teacher logits on the same batch, restricted
    // to the teacher's first teacher_k classes
    const T* teacher_logits = nullptr; // batch x teacher_k
    int teacher_k = 0;
    double distill_weight = 0.0; // lambda

    // logit-replay batch: stored logits with per-entry widths
    const T* logit_x = nullptr;
    int logit_batch = 0;
    const T* stored_logits = nullptr; // logit_batch x stored_stride
    const int* stored_widths = nullptr;
    int stored_stride = 0;
    double logit_replay_weight = 0.0; // alpha

    // label-replay batch
    const T* label_x = nullptr;
    int label_batch = 0;
    const int* replay_labels = nullptr;
    double label_replay_weight = 0.0; // beta

    // quadratic anchoring penalty
    const std::vector<EwcBundleView<T>>* bundles = nullptr;
    double penalty_weight = 0.0; // lambda

    std::uint64_t dropout_seed = 0;
};

struct LossParts {
    double total = 0.0;
    double classification = 0.0;
    double distill = 0.0;
    double logit_replay = 0.0;
    double label_replay = 0.0;
    double penalty = 0.0;
};

template <typename T>
struct StepWorkspace {
    BatchCache<T> cache;
    GradScratch<T> scratch;
    std::vector<T> logits;
    std::vector<T> dlogits;
};

// Computes the composite loss for one batch and adds its gradient into
// grad_accum (sized param_count, caller zeroes it).
template <typename T>
LossParts compute_loss_and_grad(const Net<T>& net, int k, double dropout, const StepInputs<T>& in,
                                StepWorkspace<T>& ws, T* grad_accum) {
    LossParts parts;

    // classification (+ distillation on the same forward)
    if (in.batch > 0) {
        ws.logits.assign(static_cast<std::size_t>(in.batch) * k, T(0));
        ws.dlogits.assign(static_cast<std::size_t>(in.batch) * k, T(0));
        forward_batch(net, in.x, in.batch, k, true, dropout, in.dropout_seed, ws.cache, ws.logits.data());
        parts.classification =
            sigmoid_bce_loss_grad(ws.logits.data(), in.batch, k, in.labels, 1.0, ws.dlogits.data());
        if (in.teacher_logits && in.teacher_k > 0 && in.distill_weight != 0.0) {
            // MSE over batch x teacher_k, gradient lands on the same logits
            const std::size_t n = static_cast<std::size_t>(in.batch) * in.teacher_k;
            double total = 0.0;
            const double scale = 2.0 * in.distill_weight / static_cast<double>(n);
            for (int s = 0; s < in.batch; ++s)
                for (int j = 0; j < in.teacher_k; ++j) {
                    std::size_t si = static_cast<std::size_t>(s) * k + j;
                    std::size_t ti = static_cast<std::size_t>(s) * in.teacher_k + j;
                    double d = static_cast<double>(ws.logits[si]) - static_cast<double>(in.teacher_logits[ti]);
                    total += d * d;
                    ws.dlogits[si] += static_cast<T>(scale * d);
                }
            parts.distill = in.distill_weight * (total / static_cast<double>(n));
        }
        backward_batch(net, in.x, in.batch, ws.dlogits.data(), k, ws.cache, ws.scratch, grad_accum);
    }

    // logit replay: per-entry MSE over that entry's stored width, averaged
    // over the batch
    if (in.logit_batch > 0 && in.logit_replay_weight != 0.0) {
        ws.logits.assign(static_cast<std::size_t>(in.logit_batch) * k, T(0));
        ws.dlogits.assign(static_cast<std::size_t>(in.logit_batch) * k, T(0));
        forward_batch(net, in.logit_x, in.logit_batch, k, true, dropout,
                      splitmix64(in.dropout_seed ^ 0x11ull), ws.cache, ws.logits.data());
        double total = 0.0;
        for (int s = 0; s < in.logit_batch; ++s) {
            int width = in.stored_widths[s];
            if (width < 1 || width > k) throw StateError("stored logit width out of range");
            double entry = 0.0;
            const double scale =
                2.0 * in.logit_replay_weight / (static_cast<double>(in.logit_batch) * width);
            for (int j = 0; j < width; ++j) {
                std::size_t si = static_cast<std::size_t>(s) * k + j;
                double d = static_cast<double>(ws.logits[si]) -
                           static_cast<double>(in.stored_logits[static_cast<std::size_t>(s) * in.stored_stride + j]);
                entry += d * d;
                ws.dlogits[si] += static_cast<T>(scale * d);
            }
            total += entry / width;
        }
        parts.logit_replay = in.logit_replay_weight * (total / static_cast<double>(in.logit_batch));
        backward_batch(net, in.logit_x, in.logit_batch, ws.dlogits.data(), k, ws.cache, ws.scratch,
                       grad_accum);
    }

    // label replay
    if (in.label_batch > 0 && in.label_replay_weight != 0.0) {
        ws.logits.assign(static_cast<std::size_t>(in.label_batch) * k, T(0));
        ws.dlogits.assign(static_cast<std::size_t>(in.label_batch) * k, T(0));
        forward_batch(net, in.label_x, in.label_batch, k, true, dropout,
                      splitmix64(in.dropout_seed ^ 0x22ull), ws.cache, ws.logits.data());
        parts.label_replay =
            in.label_replay_weight * sigmoid_bce_loss_grad(ws.logits.data(), in.label_batch, k,
                                                           in.replay_labels, in.label_replay_weight,
                                                           ws.dlogits.data());
        backward_batch(net, in.label_x, in.label_batch, ws.dlogits.data(), k, ws.cache, ws.scratch,
                       grad_accum);
    }

    // quadratic anchoring: (lambda/2) * sum_bundles sum_j F_j (theta_j - theta*_j)^2
    if (in.bundles && in.penalty_weight != 0.0) {
        const std::size_t P = net.dims.param_count();
        double total = 0.0;
        for (const EwcBundleView<T>& b : *in.bundles) {
            for (std::size_t i = 0; i < P; ++i) {
                double diff = static_cast<double>(net.params[i]) - static_cast<double>(b.anchor[i]);
                double imp = static_cast<double>(b.importance[i]);
                total += imp * diff * diff;
                grad_accum[i] += static_cast<T>(in.penalty_weight * imp * diff);
            }
        }
        parts.penalty = 0.5 * in.penalty_weight * total;
    }

    parts.total = parts.classification + parts.distill + parts.logit_replay + parts.label_replay +
                  parts.penalty;
    return parts;
}

} // namespace canid::nn
