#pragma once
// Causal rolling-window averaging of output logits with argmax decision,
// exploiting that the driver rarely changes between consecutive windows.
// Wrapping ER and DER++ trained models with this smoother at inference time
// yields the SmooER / SmooDER variants; training is unchanged.

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

#include "canid/common.hpp"

namespace canid {

// Ring of the most recent <= window_size logit vectors of one temporal
// stream. During warm-up (fewer than window_size inputs seen) the average is
// taken over the available prefix.
class SmoothingState {
  public:
    explicit SmoothingState(int window_size, int stream_id = 0);

    int window_size() const { return window_size_; }
    int stream_id() const { return stream_id_; }
    std::size_t fill() const { return ring_.size(); }

    // appends z (evicting the oldest when full) and returns the elementwise
    // mean over the ring contents
    std::vector<double> smooth(std::span<const float> z);
    std::vector<double> smooth(std::span<const double> z);

    void reset() { ring_.clear(); }

  private:
    int window_size_ = 6;
    int stream_id_ = 0;
    std::deque<std::vector<double>> ring_;
};

// argmax of sigmoid(z) == argmax of z by monotonicity; ties break to the
// lowest class index
int decide(std::span<const double> z_tilde);
int decide(std::span<const float> z_tilde);

} // namespace canid
