#include "canid/model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include <json.hpp>

namespace canid {

using nlohmann::json;

// ---------------------------------------------------------------------------
// nn odds and ends
// ---------------------------------------------------------------------------

namespace nn {

namespace {
std::atomic<int> g_max_threads{0};
}

void set_max_threads(int n) { g_max_threads.store(n); }
int max_threads() { return g_max_threads.load(); }

std::vector<TensorSpec> tensor_index(const NetDims& dims) {
    std::vector<TensorSpec> out;
    for (int l = 0; l < dims.layers; ++l) {
        std::string p = "lstm" + std::to_string(l);
        out.push_back({p + ".w_x", dims.wx_offset(l), 4 * dims.hidden, dims.layer_input(l)});
        out.push_back({p + ".w_h", dims.wh_offset(l), 4 * dims.hidden, dims.hidden});
        out.push_back({p + ".bias", dims.bias_offset(l), 4 * dims.hidden, 1});
    }
    out.push_back({"head.weight", dims.head_w_offset(), dims.max_classes, dims.hidden});
    out.push_back({"head.bias", dims.head_b_offset(), dims.max_classes, 1});
    return out;
}

} // namespace nn

// ---------------------------------------------------------------------------
// ClassifierConfig
// ---------------------------------------------------------------------------

void ClassifierConfig::validate() const {
    if (input_features < 1) throw ConfigError("input_features must be >= 1");
    if (hidden_size < 1) throw ConfigError("hidden_size must be >= 1");
    if (num_layers < 1) throw ConfigError("num_layers must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
    if (max_classes < 1) throw ConfigError("max_classes must be >= 1");
    if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (epochs_per_task < 1) throw ConfigError("epochs_per_task must be >= 1");
    if (window_length < 1) throw ConfigError("window_length must be >= 1");
    if (early_stopping && !(validation_fraction > 0.0 && validation_fraction < 1.0))
        throw ConfigError("validation_fraction must be in (0, 1)");
}

nn::NetDims ClassifierConfig::dims() const {
    nn::NetDims d;
    d.features = input_features;
    d.hidden = hidden_size;
    d.layers = num_layers;
    d.max_classes = max_classes;
    d.seq_len = window_length;
    return d;
}

// ---------------------------------------------------------------------------
// LstmClassifier
// ---------------------------------------------------------------------------

LstmClassifier::LstmClassifier(const ClassifierConfig& config, std::uint64_t init_seed)
    : cfg_(config), init_seed_(init_seed) {
    cfg_.validate();
    net_.dims = cfg_.dims();
    net_.allocate();
    init_all_parameters();
}

namespace {

void fill_uniform(float* dst, std::size_t n, Rng& rng, double bound) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<float>(rng.real(-bound, bound));
}

} // namespace

void LstmClassifier::init_all_parameters() {
    const double bound = 1.0 / std::sqrt(static_cast<double>(cfg_.hidden_size));
    for (const nn::TensorSpec& t : nn::tensor_index(net_.dims)) {
        if (t.name == "head.weight" || t.name == "head.bias") continue; // per-unit streams below
        Rng rng(derive_seed(init_seed_, t.name));
        fill_uniform(net_.params.data() + t.offset, static_cast<std::size_t>(t.rows) * t.cols, rng, bound);
    }
    for (int u = 0; u < cfg_.max_classes; ++u) init_head_unit(u);
}

void LstmClassifier::init_head_unit(int unit) {
    // per-unit streams make a unit's parameters independent of when the class
    // is registered, which keeps from-scratch retraining and joint training
    // bit-identical
    const double bound = 1.0 / std::sqrt(static_cast<double>(cfg_.hidden_size));
    Rng wrng(derive_seed(init_seed_, "head.weight", static_cast<std::uint64_t>(unit)));
    fill_uniform(net_.head_w() + static_cast<std::size_t>(unit) * cfg_.hidden_size,
                 static_cast<std::size_t>(cfg_.hidden_size), wrng, bound);
    Rng brng(derive_seed(init_seed_, "head.bias", static_cast<std::uint64_t>(unit)));
    net_.head_b()[unit] = static_cast<float>(brng.real(-bound, bound));
}

void LstmClassifier::reset_parameters() { init_all_parameters(); }

int LstmClassifier::unit_of(int driver) const {
    for (std::size_t i = 0; i < active_.size(); ++i)
        if (active_[i] == driver) return static_cast<int>(i);
    return -1;
}

void LstmClassifier::register_classes(const std::vector<int>& new_classes) {
    if (new_classes.empty()) return;
    std::set<int> incoming(new_classes.begin(), new_classes.end());
    if (incoming.size() != new_classes.size()) throw StateError("duplicate class in registration");
    for (int c : incoming)
        if (unit_of(c) >= 0) throw StateError("class " + std::to_string(c) + " already registered");
    if (active_.size() + incoming.size() > static_cast<std::size_t>(cfg_.max_classes))
        throw CapacityError("head capacity " + std::to_string(cfg_.max_classes) + " exceeded");
    for (int c : incoming) { // std::set iterates sorted
        int unit = static_cast<int>(active_.size());
        active_.push_back(c);
        init_head_unit(unit);
    }
}

std::vector<float> LstmClassifier::forward(std::span<const float> batch, int batch_size,
                                           bool train_mode, std::uint64_t dropout_seed) const {
    const std::size_t per = static_cast<std::size_t>(cfg_.window_length) * cfg_.input_features;
    if (batch.size() != per * static_cast<std::size_t>(batch_size))
        throw ShapeError("batch has " + std::to_string(batch.size()) + " values, expected " +
                         std::to_string(per * static_cast<std::size_t>(batch_size)));
    if (batch_size == 0) return {};
    if (active_.empty()) throw StateError("no active classes registered");
    std::vector<float> logits(static_cast<std::size_t>(batch_size) * active_.size());
    nn::BatchCache<float> cache;
    nn::forward_batch(net_, batch.data(), batch_size, active_count(), train_mode, cfg_.dropout,
                      dropout_seed, cache, logits.data());
    return logits;
}

std::uint64_t LstmClassifier::params_hash() const {
    Fnv1a h;
    h.update(net_.params.data(), net_.params.size() * sizeof(float));
    return h.digest();
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {
constexpr char kCheckpointMagic[] = "CANIDCK1";

json config_to_json(const ClassifierConfig& c) {
    return json{{"input_features", c.input_features},
                {"hidden_size", c.hidden_size},
                {"num_layers", c.num_layers},
                {"dropout", c.dropout},
                {"max_classes", c.max_classes},
                {"learning_rate", c.learning_rate},
                {"batch_size", c.batch_size},
                {"epochs_per_task", c.epochs_per_task},
                {"window_length", c.window_length},
                {"early_stopping", c.early_stopping},
                {"validation_fraction", c.validation_fraction},
                {"patience", c.patience}};
}

ClassifierConfig config_from_json(const json& j) {
    ClassifierConfig c;
    c.input_features = j.at("input_features").get<int>();
    c.hidden_size = j.at("hidden_size").get<int>();
    c.num_layers = j.at("num_layers").get<int>();
    c.dropout = j.at("dropout").get<double>();
    c.max_classes = j.at("max_classes").get<int>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.batch_size = j.at("batch_size").get<int>();
    c.epochs_per_task = j.at("epochs_per_task").get<int>();
    c.window_length = j.at("window_length").get<int>();
    c.early_stopping = j.at("early_stopping").get<bool>();
    c.validation_fraction = j.at("validation_fraction").get<double>();
    c.patience = j.at("patience").get<int>();
    return c;
}

} // namespace

void LstmClassifier::save_checkpoint(const std::filesystem::path& path) const {
    json header;
    header["config"] = config_to_json(cfg_);
    header["init_seed"] = init_seed_;
    header["active_classes"] = active_;
    header["param_count"] = net_.params.size();
    json tensors = json::array();
    for (const nn::TensorSpec& t : nn::tensor_index(net_.dims))
        tensors.push_back({{"name", t.name}, {"offset", t.offset}, {"rows", t.rows}, {"cols", t.cols}});
    header["tensors"] = tensors;
    header["params_fnv1a"] = hex64(params_hash());

    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write checkpoint: " + path.string());
    os.write(kCheckpointMagic, 8);
    io::write_u32(os, 1);
    io::write_string(os, header.dump());
    io::write_f32_array(os, net_.params.data(), net_.params.size());
    if (!os) throw IoError("checkpoint write failed: " + path.string());
}

LstmClassifier LstmClassifier::load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint: " + path.string());
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kCheckpointMagic, 8) != 0)
        throw ParseError("not a checkpoint file: " + path.string());
    std::uint32_t version = io::read_u32(is);
    if (version != 1) throw ParseError("unsupported checkpoint version " + std::to_string(version));
    json header = json::parse(io::read_string(is));
    LstmClassifier model(config_from_json(header.at("config")), header.at("init_seed").get<std::uint64_t>());
    std::size_t n = header.at("param_count").get<std::size_t>();
    if (n != model.net_.params.size()) throw StateError("checkpoint parameter count mismatch");
    io::read_f32_array(is, model.net_.params.data(), n);
    model.active_ = header.at("active_classes").get<std::vector<int>>();
    if (model.active_.size() > static_cast<std::size_t>(model.cfg_.max_classes))
        throw StateError("checkpoint has more active classes than head capacity");
    if (hex64(model.params_hash()) != header.at("params_fnv1a").get<std::string>())
        throw StateError("checkpoint integrity check failed: " + path.string());
    return model;
}

} // namespace canid
