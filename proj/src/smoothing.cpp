#include "canid/smoothing.hpp"

namespace canid {

SmoothingState::SmoothingState(int window_size, int stream_id)
    : window_size_(window_size), stream_id_(stream_id) {
    if (window_size < 1) throw ConfigError("smoothing window must be >= 1");
}

namespace {

template <typename T>
std::vector<double> smooth_impl(std::deque<std::vector<double>>& ring, int window_size,
                                std::span<const T> z) {
    if (z.empty()) throw StateError("smoothing input is empty");
    if (!ring.empty() && ring.front().size() != z.size())
        throw StateError("logit width changed mid-stream; reset the smoothing state on class growth");
    if (static_cast<int>(ring.size()) == window_size) ring.pop_front();
    ring.emplace_back(z.begin(), z.end());

    // fresh mean over the ring every step; no running-sum drift
    std::vector<double> mean(z.size(), 0.0);
    for (const std::vector<double>& v : ring)
        for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += v[j];
    const double inv = 1.0 / static_cast<double>(ring.size());
    for (double& m : mean) m *= inv;
    return mean;
}

template <typename T>
int decide_impl(std::span<const T> z) {
    if (z.empty()) throw StateError("cannot decide on an empty logit vector");
    std::size_t best = 0;
    for (std::size_t j = 1; j < z.size(); ++j)
        if (z[j] > z[best]) best = j;
    return static_cast<int>(best);
}

} // namespace

std::vector<double> SmoothingState::smooth(std::span<const float> z) {
    return smooth_impl(ring_, window_size_, z);
}

std::vector<double> SmoothingState::smooth(std::span<const double> z) {
    return smooth_impl(ring_, window_size_, z);
}

int decide(std::span<const double> z_tilde) { return decide_impl(z_tilde); }
int decide(std::span<const float> z_tilde) { return decide_impl(z_tilde); }

} // namespace canid
