// Forward/backward kernel benchmark: OpenMP kernels against the serial
// reference, at the reference network size (two layers, 128 hidden units,
// 46 features, 60-step windows, batch 32).

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "canid/nn/kernels.hpp"
#include "canid/nn/reference.hpp"

using namespace canid;

namespace {

struct Problem {
    nn::Net<float> net;
    std::vector<float> x;
    std::vector<float> dlogits;
    int B, k;
};

Problem make_problem(int B, int W, int F, int H, int L, int k, std::uint64_t seed) {
    Problem p;
    p.B = B;
    p.k = k;
    p.net.dims = {F, H, L, k, W};
    p.net.allocate();
    Rng rng(seed);
    for (float& v : p.net.params) v = static_cast<float>(rng.real(-0.1, 0.1));
    p.x.resize(static_cast<std::size_t>(B) * W * F);
    for (float& v : p.x) v = static_cast<float>(rng.normal());
    p.dlogits.resize(static_cast<std::size_t>(B) * k);
    for (float& v : p.dlogits) v = static_cast<float>(rng.normal() * 0.01);
    return p;
}

template <typename F>
double time_best_of(int reps, F&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (dt < best) best = dt;
    }
    return best;
}

} // namespace

int main(int argc, char** argv) {
    int reps = argc > 1 ? std::atoi(argv[1]) : 5;
    Problem p = make_problem(32, 60, 46, 128, 2, 10, 42);

    std::vector<float> logits(static_cast<std::size_t>(p.B) * p.k);
    std::vector<float> grad(p.net.dims.param_count());

    nn::BatchCache<float> cache;
    nn::GradScratch<float> scratch;
    std::vector<nn::ref::SampleTape<float>> tapes;

    std::printf("batch=32 window=60 features=46 hidden=128 layers=2 classes=10 (best of %d)\n\n", reps);
    std::printf("%-34s %12s\n", "kernel", "seconds");

    double t_ref = time_best_of(reps, [&] {
        std::fill(grad.begin(), grad.end(), 0.0f);
        nn::ref::forward_batch(p.net, p.x.data(), p.B, p.k, false, 0.0, 0, tapes, logits.data());
        nn::ref::backward_batch(p.net, p.B, p.dlogits.data(), p.k, false, 0.0, 0, tapes, grad.data());
    });
    std::printf("%-34s %12.4f\n", "serial reference fwd+bwd", t_ref);

    nn::set_max_threads(1);
    double t1 = time_best_of(reps, [&] {
        std::fill(grad.begin(), grad.end(), 0.0f);
        nn::forward_batch(p.net, p.x.data(), p.B, p.k, false, 0.0, 0, cache, logits.data());
        nn::backward_batch(p.net, p.x.data(), p.B, p.dlogits.data(), p.k, cache, scratch, grad.data());
    });
    std::printf("%-34s %12.4f\n", "parallel kernels, 1 thread", t1);

    nn::set_max_threads(0);
    double tn = time_best_of(reps, [&] {
        std::fill(grad.begin(), grad.end(), 0.0f);
        nn::forward_batch(p.net, p.x.data(), p.B, p.k, false, 0.0, 0, cache, logits.data());
        nn::backward_batch(p.net, p.x.data(), p.B, p.dlogits.data(), p.k, cache, scratch, grad.data());
    });
    std::printf("%-34s %12.4f\n", "parallel kernels, all threads", tn);
    std::printf("\nspeedup vs reference: %.2fx (1 thread), %.2fx (all threads)\n", t_ref / t1, t_ref / tn);
    return 0;
}
