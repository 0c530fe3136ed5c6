#pragma once
// Dataset ingestion and preparation: CSV sensor logs (or synthetic driver
// traces) -> pruned, standardized, windowed, per-session train/test splits.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "canid/common.hpp"

namespace canid {

// One drive: a T x F_raw block of sensor records in temporal order.
struct SessionTrace {
    int driver_id = 0;
    int session_id = 0; // 1-based within driver
    int rows = 0;
    int cols = 0;
    std::vector<double> records; // rows x cols, row-major
    int start_index = 0;         // temporal origin within the source stream

    double at(int r, int c) const { return records[static_cast<std::size_t>(r) * cols + c]; }
};

struct RawDataset {
    std::vector<SessionTrace> sessions;
    std::vector<std::string> feature_names;
    double sample_rate = 1.0; // records per second
};

// Zero-variance pruning plus per-feature mean/std, fitted on training rows.
struct FeatureMask {
    std::vector<bool> retained;  // length F_raw
    std::vector<double> means;   // per retained feature
    std::vector<double> stds;    // per retained feature, strictly positive
    std::vector<std::string> retained_names;
    std::vector<std::string> dropped_names; // documents what pruning removed

    int retained_count() const;
    void save_json(const std::filesystem::path& path) const;
    static FeatureMask load_json(const std::filesystem::path& path);
};

// Flat storage for fixed-shape windows; consumers reference windows by index.
struct WindowStore {
    int window_length = 0;
    int features = 0;
    std::vector<float> values; // n x window_length x features
    std::vector<std::int32_t> labels;
    std::vector<std::int32_t> session_ids;
    std::vector<std::int32_t> start_indices; // first record offset within session

    std::size_t size() const { return labels.size(); }
    std::size_t window_floats() const { return static_cast<std::size_t>(window_length) * features; }
    std::span<const float> window(std::size_t i) const {
        return {values.data() + i * window_floats(), window_floats()};
    }
    void append(std::span<const float> vals, int label, int session, int start);
};

// A single window viewed in place.
struct WindowView {
    std::span<const float> values;
    int label = 0;
    int session_id = 0;
    int index = 0;
};

struct SessionWindowCounts {
    int driver = 0;
    int session = 0;
    int train = 0;
    int test = 0;
};

// Contiguous index ranges of one session's windows inside the stores.
struct SessionRange {
    int driver = 0;
    int session = 0;
    std::uint32_t train_begin = 0, train_end = 0;
    std::uint32_t test_begin = 0, test_end = 0;
};

struct PreparedDataset {
    FeatureMask mask;
    int window_length = 60;
    int stride = 6;
    double train_fraction = 0.7;
    WindowStore train;
    WindowStore test;
    std::vector<int> driver_ids;       // sorted
    std::vector<SessionRange> sessions; // sorted by (driver, session)
    std::uint64_t content_hash = 0;

    std::vector<SessionWindowCounts> manifest() const;
    const SessionRange& session(int driver, int session_id) const;
    int sessions_per_driver(int driver) const;

    void save(const std::filesystem::path& dir) const;
    static PreparedDataset load(const std::filesystem::path& dir);
};

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

struct CsvSchema {
    std::string driver_column;
    std::string session_column;
    std::vector<std::string> ignore_columns;
    // When non-empty, any driver label outside this list is a schema error.
    std::vector<std::string> driver_labels;
    double sample_rate = 1.0;

    static CsvSchema load_json(const std::filesystem::path& path);
};

RawDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema);

// ---------------------------------------------------------------------------
// Preparation operations
// ---------------------------------------------------------------------------

// Streaming per-column statistics over the fit rows. Zero-variance columns
// are dropped; mean/std use the population (1/N) convention.
class FeatureStats {
  public:
    void add_row(const SessionTrace& trace, int row);
    std::size_t rows_seen() const { return count_; }
    FeatureMask finalize(const std::vector<std::string>& feature_names) const;

  private:
    std::size_t count_ = 0;
    std::vector<double> sum_, sumsq_, minv_, maxv_;
};

// Fit on every row of the dataset (tests and single-shot uses).
FeatureMask fit_feature_mask(const RawDataset& raw);

SessionTrace standardize(const SessionTrace& trace, const FeatureMask& mask);

// Chronological windows at offsets 0, stride, 2*stride, ..., appended to the
// store. count = floor((T - length)/stride) + 1 when T >= length, else 0.
int make_windows(const SessionTrace& trace, int length, int stride, WindowStore& out);
int window_count(int rows, int length, int stride);

enum class SplitMode { Chronological, Random };

// Train takes the first ceil(train_fraction * N) windows in chronological
// mode; test windows keep temporal order.
std::pair<int, int> split_counts(int n_windows, double train_fraction);

struct SyntheticSpec {
    int n_drivers = 5;
    int sessions_per_driver = 2;
    int records_per_session = 600;
    int n_features = 8;
    std::uint64_t seed = 0;
};

// Per-driver AR(1) signatures: distinct mean vector, AR coefficient and noise
// scale per driver, with a small per-session offset as domain shift.
RawDataset generate_synthetic(const SyntheticSpec& spec);

struct PrepareOptions {
    int window_length = 60;
    int stride = 6;
    double train_fraction = 0.7;
    SplitMode split_mode = SplitMode::Chronological;
    std::uint64_t split_seed = 0; // used by Random mode only
};

// Full pipeline: fit mask on training rows, standardize, window, split.
PreparedDataset prepare_dataset(const RawDataset& raw, const PrepareOptions& opts);

} // namespace canid
