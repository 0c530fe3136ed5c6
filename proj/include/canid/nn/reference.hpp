#pragma once
// Plain serial reference for the LSTM kernels: one sample at a time, gradient
// contributions accumulated directly into the shared buffers. Used by tests
// to validate the parallel kernels and by the benchmark target as the
// baseline. Shares only the parameter layout and the dropout mask contract
// with kernels.hpp.

#include <vector>

#include "canid/nn/kernels.hpp"

namespace canid::nn::ref {

template <typename T>
struct SampleTape {
    // per layer: gates (W x 4H, activated), cell/hidden/tanhc (W x H),
    // input (W x in, post-dropout for layers >= 1)
    std::vector<std::vector<T>> gates, cell, hidden, tanhc, input;
    std::vector<T> head_in;
};

template <typename T>
void forward_sample(const Net<T>& net, const T* xs, int sample, int k, bool train, double dropout,
                    std::uint64_t seed, SampleTape<T>& tape, T* logits_out) {
    const NetDims& d = net.dims;
    const int H = d.hidden, W = d.seq_len;
    const bool drop = train && dropout > 0.0;
    const double keep = 1.0 - dropout;

    tape.gates.assign(static_cast<std::size_t>(d.layers), {});
    tape.cell.assign(static_cast<std::size_t>(d.layers), {});
    tape.hidden.assign(static_cast<std::size_t>(d.layers), {});
    tape.tanhc.assign(static_cast<std::size_t>(d.layers), {});
    tape.input.assign(static_cast<std::size_t>(d.layers), {});

    for (int l = 0; l < d.layers; ++l) {
        const int in = d.layer_input(l);
        auto& gates = tape.gates[static_cast<std::size_t>(l)];
        auto& cell = tape.cell[static_cast<std::size_t>(l)];
        auto& hid = tape.hidden[static_cast<std::size_t>(l)];
        auto& tnc = tape.tanhc[static_cast<std::size_t>(l)];
        auto& input = tape.input[static_cast<std::size_t>(l)];
        gates.assign(static_cast<std::size_t>(W) * 4 * H, T(0));
        cell.assign(static_cast<std::size_t>(W) * H, T(0));
        hid.assign(static_cast<std::size_t>(W) * H, T(0));
        tnc.assign(static_cast<std::size_t>(W) * H, T(0));
        input.assign(static_cast<std::size_t>(W) * in, T(0));
        for (int t = 0; t < W; ++t)
            for (int c = 0; c < in; ++c) {
                T v = l == 0 ? xs[static_cast<std::size_t>(t) * in + c]
                             : tape.hidden[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(t) * H + c];
                if (l > 0 && drop) v *= dropout_mask<T>(seed, sample, l - 1, t, c, keep);
                input[static_cast<std::size_t>(t) * in + c] = v;
            }

        for (int t = 0; t < W; ++t) {
            for (int r = 0; r < 4 * H; ++r) {
                T acc = net.bias(l)[r];
                for (int c = 0; c < in; ++c)
                    acc += net.wx(l)[static_cast<std::size_t>(r) * in + c] * input[static_cast<std::size_t>(t) * in + c];
                if (t > 0)
                    for (int c = 0; c < H; ++c)
                        acc += net.wh(l)[static_cast<std::size_t>(r) * H + c] * hid[static_cast<std::size_t>(t - 1) * H + c];
                gates[static_cast<std::size_t>(t) * 4 * H + r] = acc;
            }
            for (int h = 0; h < H; ++h) {
                T* a = gates.data() + static_cast<std::size_t>(t) * 4 * H;
                T gi = sigmoid(a[h]);
                T gf = sigmoid(a[H + h]);
                T gg = std::tanh(a[2 * H + h]);
                T go = sigmoid(a[3 * H + h]);
                a[h] = gi;
                a[H + h] = gf;
                a[2 * H + h] = gg;
                a[3 * H + h] = go;
                T cprev = t > 0 ? cell[static_cast<std::size_t>(t - 1) * H + h] : T(0);
                T c = gf * cprev + gi * gg;
                cell[static_cast<std::size_t>(t) * H + h] = c;
                tnc[static_cast<std::size_t>(t) * H + h] = std::tanh(c);
                hid[static_cast<std::size_t>(t) * H + h] = go * tnc[static_cast<std::size_t>(t) * H + h];
            }
        }
    }

    tape.head_in.assign(static_cast<std::size_t>(H), T(0));
    for (int h = 0; h < H; ++h) {
        T v = tape.hidden[static_cast<std::size_t>(d.layers - 1)][static_cast<std::size_t>(W - 1) * H + h];
        if (drop) v *= dropout_mask<T>(seed, sample, kHeadDropoutSlot, 0, h, keep);
        tape.head_in[static_cast<std::size_t>(h)] = v;
    }
    for (int j = 0; j < k; ++j) {
        T acc = net.head_b()[j];
        for (int h = 0; h < H; ++h) acc += net.head_w()[static_cast<std::size_t>(j) * H + h] * tape.head_in[static_cast<std::size_t>(h)];
        logits_out[j] = acc;
    }
}

template <typename T>
void backward_sample(const Net<T>& net, int sample, const T* dlogits_row, int k, bool train,
                     double dropout, std::uint64_t seed, const SampleTape<T>& tape, T* grad) {
    const NetDims& d = net.dims;
    const int H = d.hidden, W = d.seq_len;
    const bool drop = train && dropout > 0.0;
    const double keep = 1.0 - dropout;

    std::vector<T> dh_out(static_cast<std::size_t>(W) * H, T(0));
    for (int j = 0; j < k; ++j) {
        T dj = dlogits_row[j];
        grad[d.head_b_offset() + j] += dj;
        for (int h = 0; h < H; ++h) {
            grad[d.head_w_offset() + static_cast<std::size_t>(j) * H + h] += dj * tape.head_in[static_cast<std::size_t>(h)];
            dh_out[static_cast<std::size_t>(W - 1) * H + h] += dj * net.head_w()[static_cast<std::size_t>(j) * H + h];
        }
    }
    if (drop)
        for (int h = 0; h < H; ++h)
            dh_out[static_cast<std::size_t>(W - 1) * H + h] *= dropout_mask<T>(seed, sample, kHeadDropoutSlot, 0, h, keep);

    for (int l = d.layers - 1; l >= 0; --l) {
        const int in = d.layer_input(l);
        const auto& gates = tape.gates[static_cast<std::size_t>(l)];
        const auto& cell = tape.cell[static_cast<std::size_t>(l)];
        const auto& hid = tape.hidden[static_cast<std::size_t>(l)];
        const auto& tnc = tape.tanhc[static_cast<std::size_t>(l)];
        const auto& input = tape.input[static_cast<std::size_t>(l)];
        std::vector<T> dinput(static_cast<std::size_t>(W) * in, T(0));
        std::vector<T> dc(static_cast<std::size_t>(H), T(0));
        std::vector<T> dh_rec(static_cast<std::size_t>(H), T(0));
        std::vector<T> da(4 * static_cast<std::size_t>(H), T(0));

        for (int t = W - 1; t >= 0; --t) {
            const T* a = gates.data() + static_cast<std::size_t>(t) * 4 * H;
            for (int h = 0; h < H; ++h) {
                T dht = dh_out[static_cast<std::size_t>(t) * H + h] + dh_rec[static_cast<std::size_t>(h)];
                T gi = a[h], gf = a[H + h], gg = a[2 * H + h], go = a[3 * H + h];
                T tc = tnc[static_cast<std::size_t>(t) * H + h];
                T dct = dc[static_cast<std::size_t>(h)] + dht * go * (T(1) - tc * tc);
                T cprev = t > 0 ? cell[static_cast<std::size_t>(t - 1) * H + h] : T(0);
                da[static_cast<std::size_t>(h)] = dct * gg * gi * (T(1) - gi);
                da[static_cast<std::size_t>(H + h)] = dct * cprev * gf * (T(1) - gf);
                da[static_cast<std::size_t>(2 * H + h)] = dct * gi * (T(1) - gg * gg);
                da[static_cast<std::size_t>(3 * H + h)] = dht * tc * go * (T(1) - go);
                dc[static_cast<std::size_t>(h)] = dct * gf;
            }
            std::fill(dh_rec.begin(), dh_rec.end(), T(0));
            for (int r = 0; r < 4 * H; ++r) {
                T dar = da[static_cast<std::size_t>(r)];
                grad[d.bias_offset(l) + r] += dar;
                for (int c = 0; c < in; ++c) {
                    grad[d.wx_offset(l) + static_cast<std::size_t>(r) * in + c] +=
                        dar * input[static_cast<std::size_t>(t) * in + c];
                    dinput[static_cast<std::size_t>(t) * in + c] +=
                        dar * net.wx(l)[static_cast<std::size_t>(r) * in + c];
                }
                if (t > 0)
                    for (int c = 0; c < H; ++c)
                        grad[d.wh_offset(l) + static_cast<std::size_t>(r) * H + c] +=
                            dar * hid[static_cast<std::size_t>(t - 1) * H + c];
                for (int c = 0; c < H; ++c)
                    dh_rec[static_cast<std::size_t>(c)] += dar * net.wh(l)[static_cast<std::size_t>(r) * H + c];
            }
        }

        if (l > 0) {
            for (int t = 0; t < W; ++t)
                for (int h = 0; h < H; ++h) {
                    T v = dinput[static_cast<std::size_t>(t) * H + h];
                    if (drop) v *= dropout_mask<T>(seed, sample, l - 1, t, h, keep);
                    dh_out[static_cast<std::size_t>(t) * H + h] = v;
                }
        }
    }
}

// Whole-batch convenience wrappers used by tests and the benchmark.
template <typename T>
void forward_batch(const Net<T>& net, const T* x, int B, int k, bool train, double dropout,
                   std::uint64_t seed, std::vector<SampleTape<T>>& tapes, T* logits_out) {
    tapes.resize(static_cast<std::size_t>(B));
    const std::size_t xstride = static_cast<std::size_t>(net.dims.seq_len) * net.dims.features;
    for (int s = 0; s < B; ++s)
        forward_sample(net, x + s * xstride, s, k, train, dropout, seed, tapes[static_cast<std::size_t>(s)],
                       logits_out + static_cast<std::size_t>(s) * k);
}

template <typename T>
void backward_batch(const Net<T>& net, int B, const T* dlogits, int k, bool train, double dropout,
                    std::uint64_t seed, const std::vector<SampleTape<T>>& tapes, T* grad_accum) {
    for (int s = 0; s < B; ++s)
        backward_sample(net, s, dlogits + static_cast<std::size_t>(s) * k, k, train, dropout, seed,
                        tapes[static_cast<std::size_t>(s)], grad_accum);
}

} // namespace canid::nn::ref
