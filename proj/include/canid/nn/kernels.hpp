#pragma once
// LSTM sequence-classifier kernels, templated on the scalar type (float in
// production, double in the gradient-check tests).
//
// The batch dimension is data-parallel: each sample's forward pass and
// backward-through-time pass write only per-sample buffers, and gradient
// contributions are reduced serially in sample order afterwards. Results are
// therefore bit-identical for any thread count, including the unthreaded
// build. A straightforward serial implementation lives in nn/reference.hpp
// and is compared against these kernels by tests and the benchmark target.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "canid/common.hpp"

namespace canid::nn {

// ---------------------------------------------------------------------------
// Threading control
// ---------------------------------------------------------------------------

// 0 means "whatever OpenMP defaults to"; 1 forces the serial path.
void set_max_threads(int n);
int max_threads();

inline int resolve_threads() {
#ifdef _OPENMP
    int n = max_threads();
    return n > 0 ? n : omp_get_max_threads();
#else
    return 1;
#endif
}

// ---------------------------------------------------------------------------
// Dimensions and flat parameter layout
// ---------------------------------------------------------------------------

// Gate order within each 4H block: input, forget, cell, output.
struct NetDims {
    int features = 0;    // F
    int hidden = 0;      // H
    int layers = 1;      // L
    int max_classes = 0; // head rows allocated up front
    int seq_len = 0;     // W

    int layer_input(int l) const { return l == 0 ? features : hidden; }

    std::size_t layer_param_count(int l) const {
        std::size_t h4 = 4 * static_cast<std::size_t>(hidden);
        return h4 * layer_input(l) + h4 * hidden + h4;
    }
    std::size_t layer_offset(int l) const {
        std::size_t off = 0;
        for (int i = 0; i < l; ++i) off += layer_param_count(i);
        return off;
    }
    std::size_t wx_offset(int l) const { return layer_offset(l); }
    std::size_t wh_offset(int l) const {
        return layer_offset(l) + 4 * static_cast<std::size_t>(hidden) * layer_input(l);
    }
    std::size_t bias_offset(int l) const {
        return wh_offset(l) + 4 * static_cast<std::size_t>(hidden) * hidden;
    }
    std::size_t head_w_offset() const { return layer_offset(layers); }
    std::size_t head_b_offset() const {
        return head_w_offset() + static_cast<std::size_t>(max_classes) * hidden;
    }
    std::size_t param_count() const {
        return head_b_offset() + static_cast<std::size_t>(max_classes);
    }
};

struct TensorSpec {
    std::string name;
    std::size_t offset = 0;
    int rows = 0;
    int cols = 1;
};

std::vector<TensorSpec> tensor_index(const NetDims& dims);

// ---------------------------------------------------------------------------
// Scalar helpers
// ---------------------------------------------------------------------------

template <typename T>
inline T sigmoid(T x) {
    if (x >= T(0)) {
        T e = std::exp(-x);
        return T(1) / (T(1) + e);
    }
    T e = std::exp(x);
    return e / (T(1) + e);
}

// Stateless dropout mask: deterministic in (seed, sample, slot, t, unit), so
// forward and backward recompute the same mask with no storage and no
// dependence on evaluation order. slot 0..layers-2 are the between-layer
// boundaries; slot 15 is the pre-head mask.
template <typename T>
inline T dropout_mask(std::uint64_t seed, int sample, int slot, int t, int unit, double keep) {
    std::uint64_t key = (static_cast<std::uint64_t>(sample) << 44) |
                        (static_cast<std::uint64_t>(slot & 0xf) << 40) |
                        (static_cast<std::uint64_t>(t) << 20) | static_cast<std::uint64_t>(unit);
    std::uint64_t u = splitmix64(seed ^ key);
    double r = static_cast<double>(u >> 11) * 0x1.0p-53;
    return r < keep ? static_cast<T>(1.0 / keep) : T(0);
}

constexpr int kHeadDropoutSlot = 15;

// ---------------------------------------------------------------------------
// Parameters + per-batch caches
// ---------------------------------------------------------------------------

template <typename T>
struct Net {
    NetDims dims;
    std::vector<T> params;

    void allocate() { params.assign(dims.param_count(), T(0)); }

    T* wx(int l) { return params.data() + dims.wx_offset(l); }
    T* wh(int l) { return params.data() + dims.wh_offset(l); }
    T* bias(int l) { return params.data() + dims.bias_offset(l); }
    T* head_w() { return params.data() + dims.head_w_offset(); }
    T* head_b() { return params.data() + dims.head_b_offset(); }
    const T* wx(int l) const { return params.data() + dims.wx_offset(l); }
    const T* wh(int l) const { return params.data() + dims.wh_offset(l); }
    const T* bias(int l) const { return params.data() + dims.bias_offset(l); }
    const T* head_w() const { return params.data() + dims.head_w_offset(); }
    const T* head_b() const { return params.data() + dims.head_b_offset(); }
};

// Per-sample activation caches for one batch. Laid out sample-major so each
// thread touches disjoint memory.
template <typename T>
struct BatchCache {
    int batch = 0;
    NetDims dims;
    bool train = false;
    double dropout = 0.0;
    std::uint64_t dropout_seed = 0;

    std::vector<T> gates;  // L x B x W x 4H (activated gate values)
    std::vector<T> cell;   // L x B x W x H
    std::vector<T> hidden; // L x B x W x H
    std::vector<T> tanhc;  // L x B x W x H
    std::vector<T> inputs; // (L-1) x B x W x H: layer inputs after dropout, layers 1..L-1
    std::vector<T> head_in; // B x H: top-layer last hidden state after dropout

    void resize(const NetDims& d, int B) {
        dims = d;
        batch = B;
        std::size_t bw = static_cast<std::size_t>(B) * d.seq_len;
        gates.resize(static_cast<std::size_t>(d.layers) * bw * 4 * d.hidden);
        cell.resize(static_cast<std::size_t>(d.layers) * bw * d.hidden);
        hidden.resize(static_cast<std::size_t>(d.layers) * bw * d.hidden);
        tanhc.resize(static_cast<std::size_t>(d.layers) * bw * d.hidden);
        inputs.resize(static_cast<std::size_t>(d.layers > 1 ? d.layers - 1 : 0) * bw * d.hidden);
        head_in.resize(static_cast<std::size_t>(B) * d.hidden);
    }

    T* gates_at(int l, int s) {
        std::size_t per = static_cast<std::size_t>(dims.seq_len) * 4 * dims.hidden;
        return gates.data() + (static_cast<std::size_t>(l) * batch + s) * per;
    }
    T* cell_at(int l, int s) {
        std::size_t per = static_cast<std::size_t>(dims.seq_len) * dims.hidden;
        return cell.data() + (static_cast<std::size_t>(l) * batch + s) * per;
    }
    T* hidden_at(int l, int s) {
        std::size_t per = static_cast<std::size_t>(dims.seq_len) * dims.hidden;
        return hidden.data() + (static_cast<std::size_t>(l) * batch + s) * per;
    }
    T* tanhc_at(int l, int s) {
        std::size_t per = static_cast<std::size_t>(dims.seq_len) * dims.hidden;
        return tanhc.data() + (static_cast<std::size_t>(l) * batch + s) * per;
    }
    // input of layer l (>= 1) for sample s
    T* input_at(int l, int s) {
        std::size_t per = static_cast<std::size_t>(dims.seq_len) * dims.hidden;
        return inputs.data() + (static_cast<std::size_t>(l - 1) * batch + s) * per;
    }
    T* head_in_at(int s) { return head_in.data() + static_cast<std::size_t>(s) * dims.hidden; }
};

// Scratch for the backward pass: per-sample gradient buffers plus per-sample
// work arrays, reduced serially in sample order.
template <typename T>
struct GradScratch {
    std::vector<T> per_sample; // B x param_count
    std::vector<T> work;       // B x (2*W*H + 12H)
    int batch = 0;
    std::size_t params = 0, work_per = 0;

    void resize(const NetDims& d, int B) {
        batch = B;
        params = d.param_count();
        work_per = 2 * static_cast<std::size_t>(d.seq_len) * d.hidden + 12 * static_cast<std::size_t>(d.hidden);
        per_sample.resize(static_cast<std::size_t>(B) * params);
        work.resize(static_cast<std::size_t>(B) * work_per);
    }
    T* grad_at(int s) { return per_sample.data() + static_cast<std::size_t>(s) * params; }
    T* work_at(int s) { return work.data() + static_cast<std::size_t>(s) * work_per; }
};

// ---------------------------------------------------------------------------
// Forward
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
void forward_sample(const Net<T>& net, const T* xs, int sample, int k, bool train, double dropout,
                    std::uint64_t seed, BatchCache<T>& cache, T* logits_row) {
    const NetDims& d = net.dims;
    const int H = d.hidden, W = d.seq_len;
    const bool drop = train && dropout > 0.0;
    const double keep = 1.0 - dropout;

    for (int l = 0; l < d.layers; ++l) {
        const int in = d.layer_input(l);
        const T* wx = net.wx(l);
        const T* wh = net.wh(l);
        const T* b = net.bias(l);
        T* gates = cache.gates_at(l, sample);
        T* cell = cache.cell_at(l, sample);
        T* hid = cache.hidden_at(l, sample);
        T* tnc = cache.tanhc_at(l, sample);
        const T* input = l == 0 ? xs : cache.input_at(l, sample);

        for (int t = 0; t < W; ++t) {
            const T* xt = input + static_cast<std::size_t>(t) * in;
            const T* hprev = t > 0 ? hid + static_cast<std::size_t>(t - 1) * H : nullptr;
            T* a = gates + static_cast<std::size_t>(t) * 4 * H;
            for (int r = 0; r < 4 * H; ++r) {
                T acc = b[r];
                const T* wrow = wx + static_cast<std::size_t>(r) * in;
                for (int c = 0; c < in; ++c) acc += wrow[c] * xt[c];
                if (hprev) {
                    const T* hrow = wh + static_cast<std::size_t>(r) * H;
                    for (int c = 0; c < H; ++c) acc += hrow[c] * hprev[c];
                }
                a[r] = acc;
            }
            T* ct = cell + static_cast<std::size_t>(t) * H;
            T* ht = hid + static_cast<std::size_t>(t) * H;
            T* tt = tnc + static_cast<std::size_t>(t) * H;
            const T* cprev = t > 0 ? cell + static_cast<std::size_t>(t - 1) * H : nullptr;
            for (int h = 0; h < H; ++h) {
                T gi = sigmoid(a[h]);
                T gf = sigmoid(a[H + h]);
                T gg = std::tanh(a[2 * H + h]);
                T go = sigmoid(a[3 * H + h]);
                a[h] = gi;
                a[H + h] = gf;
                a[2 * H + h] = gg;
                a[3 * H + h] = go;
                T c = gf * (cprev ? cprev[h] : T(0)) + gi * gg;
                ct[h] = c;
                T tc = std::tanh(c);
                tt[h] = tc;
                ht[h] = go * tc;
            }
        }

        if (l + 1 < d.layers) {
            // next layer consumes this layer's hidden states, with dropout in
            // training mode
            T* next_in = cache.input_at(l + 1, sample);
            for (int t = 0; t < W; ++t) {
                const T* ht = hid + static_cast<std::size_t>(t) * H;
                T* xt = next_in + static_cast<std::size_t>(t) * H;
                if (drop) {
                    for (int h = 0; h < H; ++h)
                        xt[h] = ht[h] * dropout_mask<T>(seed, sample, l, t, h, keep);
                } else {
                    std::memcpy(xt, ht, sizeof(T) * static_cast<std::size_t>(H));
                }
            }
        }
    }

    // head reads the last hidden state of the top layer
    const T* hlast = cache.hidden_at(d.layers - 1, sample) + static_cast<std::size_t>(W - 1) * H;
    T* hin = cache.head_in_at(sample);
    if (drop) {
        for (int h = 0; h < H; ++h)
            hin[h] = hlast[h] * dropout_mask<T>(seed, sample, kHeadDropoutSlot, 0, h, keep);
    } else {
        std::memcpy(hin, hlast, sizeof(T) * static_cast<std::size_t>(H));
    }
    const T* hw = net.head_w();
    const T* hb = net.head_b();
    for (int j = 0; j < k; ++j) {
        T acc = hb[j];
        const T* row = hw + static_cast<std::size_t>(j) * H;
        for (int h = 0; h < H; ++h) acc += row[h] * hin[h];
        logits_row[j] = acc;
    }
}

template <typename T>
void backward_sample(const Net<T>& net, const T* xs, int sample, const T* dlogits_row, int k,
                     BatchCache<T>& cache, T* grad, T* work) {
    const NetDims& d = net.dims;
    const int H = d.hidden, W = d.seq_len;
    const bool drop = cache.train && cache.dropout > 0.0;
    const double keep = 1.0 - cache.dropout;
    const std::uint64_t seed = cache.dropout_seed;

    // work layout: dh_out (W*H) | dinput (W*H) | da (4H) | dc (H) | dh_rec (H)
    T* dh_out = work;
    T* dinput = work + static_cast<std::size_t>(W) * H;
    T* da = dinput + static_cast<std::size_t>(W) * H;
    T* dc = da + 4 * H;
    T* dh_rec = dc + H;

    std::fill(dh_out, dh_out + static_cast<std::size_t>(W) * H, T(0));

    // head
    {
        const T* hin = cache.head_in_at(sample);
        const T* hw = net.head_w();
        T* ghw = grad + d.head_w_offset();
        T* ghb = grad + d.head_b_offset();
        T* dlast = dh_out + static_cast<std::size_t>(W - 1) * H;
        for (int j = 0; j < k; ++j) {
            T dj = dlogits_row[j];
            if (dj == T(0)) continue;
            const T* row = hw + static_cast<std::size_t>(j) * H;
            T* grow = ghw + static_cast<std::size_t>(j) * H;
            for (int h = 0; h < H; ++h) {
                grow[h] += dj * hin[h];
                dlast[h] += dj * row[h];
            }
            ghb[j] += dj;
        }
        if (drop) {
            for (int h = 0; h < H; ++h)
                dlast[h] *= dropout_mask<T>(seed, sample, kHeadDropoutSlot, 0, h, keep);
        }
    }

    for (int l = d.layers - 1; l >= 0; --l) {
        const int in = d.layer_input(l);
        const T* wx = net.wx(l);
        const T* wh = net.wh(l);
        const T* input = l == 0 ? xs : cache.input_at(l, sample);
        const T* gates = cache.gates_at(l, sample);
        const T* cell = cache.cell_at(l, sample);
        const T* hid = cache.hidden_at(l, sample);
        const T* tnc = cache.tanhc_at(l, sample);
        T* gwx = grad + d.wx_offset(l);
        T* gwh = grad + d.wh_offset(l);
        T* gb = grad + d.bias_offset(l);

        std::fill(dc, dc + H, T(0));
        std::fill(dh_rec, dh_rec + H, T(0));
        if (l > 0) std::fill(dinput, dinput + static_cast<std::size_t>(W) * H, T(0));

        for (int t = W - 1; t >= 0; --t) {
            const T* a = gates + static_cast<std::size_t>(t) * 4 * H;
            const T* tc = tnc + static_cast<std::size_t>(t) * H;
            const T* cprev = t > 0 ? cell + static_cast<std::size_t>(t - 1) * H : nullptr;
            const T* hprev = t > 0 ? hid + static_cast<std::size_t>(t - 1) * H : nullptr;
            const T* dout = dh_out + static_cast<std::size_t>(t) * H;

            for (int h = 0; h < H; ++h) {
                T dht = dout[h] + dh_rec[h];
                T gi = a[h], gf = a[H + h], gg = a[2 * H + h], go = a[3 * H + h];
                T dct = dc[h] + dht * go * (T(1) - tc[h] * tc[h]);
                T di = dct * gg;
                T df = cprev ? dct * cprev[h] : T(0);
                T dg = dct * gi;
                T do_ = dht * tc[h];
                da[h] = di * gi * (T(1) - gi);
                da[H + h] = df * gf * (T(1) - gf);
                da[2 * H + h] = dg * (T(1) - gg * gg);
                da[3 * H + h] = do_ * go * (T(1) - go);
                dc[h] = dct * gf; // becomes dc for t-1
            }

            const T* xt = input + static_cast<std::size_t>(t) * in;
            T* dxt = l > 0 ? dinput + static_cast<std::size_t>(t) * H : nullptr;
            std::fill(dh_rec, dh_rec + H, T(0));
            for (int r = 0; r < 4 * H; ++r) {
                T dar = da[r];
                gb[r] += dar;
                if (dar == T(0)) continue;
                T* gxrow = gwx + static_cast<std::size_t>(r) * in;
                for (int c = 0; c < in; ++c) gxrow[c] += dar * xt[c];
                if (hprev) {
                    T* ghrow = gwh + static_cast<std::size_t>(r) * H;
                    const T* whrow = wh + static_cast<std::size_t>(r) * H;
                    for (int c = 0; c < H; ++c) {
                        ghrow[c] += dar * hprev[c];
                        dh_rec[c] += dar * whrow[c];
                    }
                } else {
                    const T* whrow = wh + static_cast<std::size_t>(r) * H;
                    for (int c = 0; c < H; ++c) dh_rec[c] += dar * whrow[c];
                }
                if (dxt) {
                    const T* wxrow = wx + static_cast<std::size_t>(r) * in;
                    for (int c = 0; c < in; ++c) dxt[c] += dar * wxrow[c];
                }
            }
        }

        if (l > 0) {
            // propagate into the layer below through its dropout mask
            if (drop) {
                for (int t = 0; t < W; ++t)
                    for (int h = 0; h < H; ++h)
                        dh_out[static_cast<std::size_t>(t) * H + h] =
                            dinput[static_cast<std::size_t>(t) * H + h] *
                            dropout_mask<T>(seed, sample, l - 1, t, h, keep);
            } else {
                std::memcpy(dh_out, dinput, sizeof(T) * static_cast<std::size_t>(W) * H);
            }
        }
    }
}

} // namespace detail

// x: B x W x F, logits_out: B x k (head rows 0..k-1)
template <typename T>
void forward_batch(const Net<T>& net, const T* x, int B, int k, bool train, double dropout,
                   std::uint64_t dropout_seed, BatchCache<T>& cache, T* logits_out) {
    cache.resize(net.dims, B);
    cache.train = train;
    cache.dropout = dropout;
    cache.dropout_seed = dropout_seed;
    const std::size_t xstride = static_cast<std::size_t>(net.dims.seq_len) * net.dims.features;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(resolve_threads())
#endif
    for (int s = 0; s < B; ++s) {
        detail::forward_sample(net, x + s * xstride, s, k, train, dropout, dropout_seed, cache,
                               logits_out + static_cast<std::size_t>(s) * k);
    }
}

// Adds this batch's parameter gradients into grad_accum. The per-sample
// contributions are reduced in sample order, independent of threading.
template <typename T>
void backward_batch(const Net<T>& net, const T* x, int B, const T* dlogits, int k,
                    BatchCache<T>& cache, GradScratch<T>& scratch, T* grad_accum) {
    scratch.resize(net.dims, B);
    const std::size_t xstride = static_cast<std::size_t>(net.dims.seq_len) * net.dims.features;
    const std::size_t P = net.dims.param_count();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(resolve_threads())
#endif
    for (int s = 0; s < B; ++s) {
        T* g = scratch.grad_at(s);
        std::fill(g, g + P, T(0));
        detail::backward_sample(net, x + s * xstride, s, dlogits + static_cast<std::size_t>(s) * k,
                                k, cache, g, scratch.work_at(s));
    }
    for (int s = 0; s < B; ++s) {
        const T* g = scratch.grad_at(s);
        for (std::size_t i = 0; i < P; ++i) grad_accum[i] += g[i];
    }
}

// Adds each sample's squared per-parameter gradient into sq_accum (the
// empirical diagonal Fisher is the mean of these over a task's samples).
// dlogits rows must carry per-sample loss scaling, not batch-mean scaling.
template <typename T>
void backward_batch_squared(const Net<T>& net, const T* x, int B, const T* dlogits, int k,
                            BatchCache<T>& cache, GradScratch<T>& scratch, T* sq_accum) {
    scratch.resize(net.dims, B);
    const std::size_t xstride = static_cast<std::size_t>(net.dims.seq_len) * net.dims.features;
    const std::size_t P = net.dims.param_count();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(resolve_threads())
#endif
    for (int s = 0; s < B; ++s) {
        T* g = scratch.grad_at(s);
        std::fill(g, g + P, T(0));
        detail::backward_sample(net, x + s * xstride, s, dlogits + static_cast<std::size_t>(s) * k,
                                k, cache, g, scratch.work_at(s));
    }
    for (int s = 0; s < B; ++s) {
        const T* g = scratch.grad_at(s);
        for (std::size_t i = 0; i < P; ++i) sq_accum[i] += g[i] * g[i];
    }
}

// ---------------------------------------------------------------------------
// Losses (scalar accumulation in double)
// ---------------------------------------------------------------------------

template <typename T>
inline double bce_with_logits_element(T z, bool target) {
    double zd = static_cast<double>(z);
    double y = target ? 1.0 : 0.0;
    if (zd >= 0.0) return zd - zd * y + std::log1p(std::exp(-zd));
    return -zd * y + std::log1p(std::exp(zd));
}

// Mean over B x k of per-class binary cross-entropy against one-hot targets.
template <typename T>
double sigmoid_bce_loss(const T* logits, int B, int k, const int* labels) {
    if (B == 0) return 0.0;
    double total = 0.0;
    for (int s = 0; s < B; ++s) {
        if (labels[s] < 0 || labels[s] >= k) throw IndexError("label out of range of active classes");
        for (int j = 0; j < k; ++j)
            total += bce_with_logits_element(logits[static_cast<std::size_t>(s) * k + j], labels[s] == j);
    }
    return total / (static_cast<double>(B) * k);
}

// Same, also adding weight * dLoss/dlogits into dlogits_accum.
template <typename T>
double sigmoid_bce_loss_grad(const T* logits, int B, int k, const int* labels, double weight,
                             T* dlogits_accum) {
    if (B == 0) return 0.0;
    double total = 0.0;
    const double scale = weight / (static_cast<double>(B) * k);
    for (int s = 0; s < B; ++s) {
        if (labels[s] < 0 || labels[s] >= k) throw IndexError("label out of range of active classes");
        for (int j = 0; j < k; ++j) {
            std::size_t idx = static_cast<std::size_t>(s) * k + j;
            bool y = labels[s] == j;
            total += bce_with_logits_element(logits[idx], y);
            double p = static_cast<double>(sigmoid(logits[idx]));
            dlogits_accum[idx] += static_cast<T>(scale * (p - (y ? 1.0 : 0.0)));
        }
    }
    return total / (static_cast<double>(B) * k);
}

// Mean squared error over B x k entries.
template <typename T>
double mse_loss(const T* a, const T* b, std::size_t n) {
    if (n == 0) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        total += d * d;
    }
    return total / static_cast<double>(n);
}

template <typename T>
double mse_loss_grad(const T* a, const T* b, std::size_t n, double weight, T* da_accum) {
    if (n == 0) return 0.0;
    double total = 0.0;
    const double scale = 2.0 * weight / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        total += d * d;
        da_accum[i] += static_cast<T>(scale * d);
    }
    return total / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

template <typename T>
struct Adam {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::vector<T> m, v;
    long step = 0;

    void init(std::size_t n) {
        m.assign(n, T(0));
        v.assign(n, T(0));
        step = 0;
    }
    void update(T* params, const T* grad, std::size_t n) {
        ++step;
        const double bc1 = 1.0 - std::pow(beta1, step);
        const double bc2 = 1.0 - std::pow(beta2, step);
        for (std::size_t i = 0; i < n; ++i) {
            double g = static_cast<double>(grad[i]);
            double mi = beta1 * static_cast<double>(m[i]) + (1.0 - beta1) * g;
            double vi = beta2 * static_cast<double>(v[i]) + (1.0 - beta2) * g * g;
            m[i] = static_cast<T>(mi);
            v[i] = static_cast<T>(vi);
            double mhat = mi / bc1;
            double vhat = vi / bc2;
            params[i] = static_cast<T>(static_cast<double>(params[i]) - lr * mhat / (std::sqrt(vhat) + eps));
        }
    }
};

} // namespace canid::nn
