#pragma once
// The sequence classifier: a stacked LSTM over standardized windows with a
// fixed-width linear head (max_classes units allocated up front, inactive
// units masked out of loss and prediction). Checkpoints are versioned binary
// files with little-endian 32-bit float parameters.

#include <filesystem>
#include <span>
#include <vector>

#include "canid/common.hpp"
#include "canid/nn/kernels.hpp"

namespace canid {

struct ClassifierConfig {
    int input_features = 46;
    int hidden_size = 128;
    int num_layers = 2;
    double dropout = 0.5;
    int max_classes = 10;
    double learning_rate = 0.001;
    int batch_size = 32;
    int epochs_per_task = 50; // 300 reproduces the reference recipe
    int window_length = 60;

    // optional early stopping on a held-out slice of each task's windows
    bool early_stopping = false;
    double validation_fraction = 0.1;
    int patience = 10;

    void validate() const;
    nn::NetDims dims() const;
};

class LstmClassifier {
  public:
    LstmClassifier(const ClassifierConfig& config, std::uint64_t init_seed);

    const ClassifierConfig& config() const { return cfg_; }
    std::uint64_t init_seed() const { return init_seed_; }
    nn::Net<float>& net() { return net_; }
    const nn::Net<float>& net() const { return net_; }
    std::size_t param_count() const { return net_.dims.param_count(); }

    const std::vector<int>& active_classes() const { return active_; }
    int active_count() const { return static_cast<int>(active_.size()); }
    // head unit for a driver id, -1 if unregistered
    int unit_of(int driver) const;

    // re-derive every parameter from the init seed (used by from-scratch
    // retraining); the active-class registry is preserved
    void reset_parameters();

    // appends new classes (sorted) and re-initializes their head units from
    // the per-unit seeded streams; all other parameters are untouched
    void register_classes(const std::vector<int>& new_classes);

    // raw logits restricted to active classes, in active_classes order;
    // dropout only when train_mode is set (masks drawn from dropout_seed)
    std::vector<float> forward(std::span<const float> batch, int batch_size, bool train_mode,
                               std::uint64_t dropout_seed = 0) const;

    std::uint64_t params_hash() const;

    void save_checkpoint(const std::filesystem::path& path) const;
    static LstmClassifier load_checkpoint(const std::filesystem::path& path);

  private:
    void init_all_parameters();
    void init_head_unit(int unit);

    ClassifierConfig cfg_;
    std::uint64_t init_seed_ = 0;
    nn::Net<float> net_;
    std::vector<int> active_;
};

struct EpochLog {
    double mean_loss = 0.0;
    int batches = 0;
};

struct TrainingLog {
    std::vector<EpochLog> epochs;
    double seconds = 0.0;
    int stopped_early_at = -1; // epoch index, -1 if ran to completion
};

} // namespace canid
