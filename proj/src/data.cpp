#include "canid/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace canid {

using nlohmann::json;

// ---------------------------------------------------------------------------
// FeatureMask
// ---------------------------------------------------------------------------

int FeatureMask::retained_count() const {
    return static_cast<int>(std::count(retained.begin(), retained.end(), true));
}

void FeatureMask::save_json(const std::filesystem::path& path) const {
    json j;
    j["retained"] = retained;
    j["means"] = means;
    j["stds"] = stds;
    j["retained_names"] = retained_names;
    j["dropped_names"] = dropped_names;
    std::ofstream os(path);
    if (!os) throw IoError("cannot write feature mask: " + path.string());
    os << j.dump(2) << '\n';
}

FeatureMask FeatureMask::load_json(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot read feature mask: " + path.string());
    json j = json::parse(is);
    FeatureMask m;
    m.retained = j.at("retained").get<std::vector<bool>>();
    m.means = j.at("means").get<std::vector<double>>();
    m.stds = j.at("stds").get<std::vector<double>>();
    m.retained_names = j.at("retained_names").get<std::vector<std::string>>();
    m.dropped_names = j.at("dropped_names").get<std::vector<std::string>>();
    return m;
}

// ---------------------------------------------------------------------------
// WindowStore
// ---------------------------------------------------------------------------

void WindowStore::append(std::span<const float> vals, int label, int session, int start) {
    if (vals.size() != window_floats()) throw ShapeError("window value count mismatch");
    values.insert(values.end(), vals.begin(), vals.end());
    labels.push_back(label);
    session_ids.push_back(session);
    start_indices.push_back(start);
}

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

CsvSchema CsvSchema::load_json(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot read schema: " + path.string());
    json j = json::parse(is);
    CsvSchema s;
    s.driver_column = j.at("driver_column").get<std::string>();
    s.session_column = j.at("session_column").get<std::string>();
    if (j.contains("ignore_columns")) s.ignore_columns = j["ignore_columns"].get<std::vector<std::string>>();
    if (j.contains("driver_labels")) s.driver_labels = j["driver_labels"].get<std::vector<std::string>>();
    if (j.contains("sample_rate")) s.sample_rate = j["sample_rate"].get<double>();
    return s;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim whitespace and CR
        std::size_t b = cell.find_first_not_of(" \t\r");
        std::size_t e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_numeric(const std::string& cell, std::size_t row_number, const std::string& column) {
    if (cell.empty()) throw ParseError("row " + std::to_string(row_number) + ": empty cell in column " + column);
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(cell, &pos);
    } catch (const std::exception&) {
        throw ParseError("row " + std::to_string(row_number) + ": non-numeric cell '" + cell + "' in column " + column);
    }
    if (pos != cell.size())
        throw ParseError("row " + std::to_string(row_number) + ": non-numeric cell '" + cell + "' in column " + column);
    if (!std::isfinite(v))
        throw ParseError("row " + std::to_string(row_number) + ": non-finite value in column " + column);
    return v;
}

} // namespace

RawDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open csv file: " + path.string());

    std::string header_line;
    if (!std::getline(is, header_line)) throw ParseError("empty file: " + path.string());
    std::vector<std::string> header = split_csv_line(header_line);
    if (header.empty()) throw ParseError("empty header: " + path.string());

    int driver_col = -1, session_col = -1;
    std::vector<int> sensor_cols;
    std::vector<std::string> sensor_names;
    std::set<std::string> ignore(schema.ignore_columns.begin(), schema.ignore_columns.end());
    for (int c = 0; c < static_cast<int>(header.size()); ++c) {
        const std::string& name = header[static_cast<std::size_t>(c)];
        if (name == schema.driver_column) {
            driver_col = c;
        } else if (name == schema.session_column) {
            session_col = c;
        } else if (!ignore.count(name)) {
            sensor_cols.push_back(c);
            sensor_names.push_back(name);
        }
    }
    if (driver_col < 0) throw SchemaError("driver column '" + schema.driver_column + "' not found");
    if (session_col < 0) throw SchemaError("session column '" + schema.session_column + "' not found");
    if (sensor_cols.empty()) throw SchemaError("no sensor columns left after exclusions");

    std::set<std::string> allowed(schema.driver_labels.begin(), schema.driver_labels.end());

    // rows grouped by (driver label, session value) in file order
    struct Group {
        std::vector<double> rows;
        int count = 0;
        std::size_t first_row = 0;
    };
    std::map<std::pair<std::string, long long>, Group> groups;

    std::string line;
    std::size_t row_number = 1; // header was row 1
    std::size_t data_rows = 0;
    while (std::getline(is, line)) {
        ++row_number;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError("row " + std::to_string(row_number) + ": expected " + std::to_string(header.size()) +
                             " cells, got " + std::to_string(cells.size()));
        const std::string& driver_label = cells[static_cast<std::size_t>(driver_col)];
        if (!allowed.empty() && !allowed.count(driver_label))
            throw SchemaError("row " + std::to_string(row_number) + ": unknown driver label '" + driver_label + "'");
        long long session_value =
            static_cast<long long>(parse_numeric(cells[static_cast<std::size_t>(session_col)], row_number, schema.session_column));
        Group& g = groups[{driver_label, session_value}];
        if (g.count == 0) g.first_row = row_number;
        for (std::size_t k = 0; k < sensor_cols.size(); ++k)
            g.rows.push_back(parse_numeric(cells[static_cast<std::size_t>(sensor_cols[k])], row_number, sensor_names[k]));
        ++g.count;
        ++data_rows;
    }
    if (data_rows == 0) throw ParseError("no data rows: " + path.string());

    // driver labels -> ids by sorted order; session values -> 1..m per driver
    std::set<std::string> labels;
    for (const auto& [key, g] : groups) labels.insert(key.first);
    std::map<std::string, int> driver_id;
    int next = 0;
    for (const std::string& l : labels) driver_id[l] = next++;

    std::map<std::string, std::vector<long long>> driver_sessions;
    for (const auto& [key, g] : groups) driver_sessions[key.first].push_back(key.second);

    RawDataset out;
    out.feature_names = sensor_names;
    out.sample_rate = schema.sample_rate;
    for (const auto& [label, sessions] : driver_sessions) {
        for (std::size_t si = 0; si < sessions.size(); ++si) {
            const Group& g = groups.at({label, sessions[si]});
            SessionTrace t;
            t.driver_id = driver_id[label];
            t.session_id = static_cast<int>(si) + 1;
            t.rows = g.count;
            t.cols = static_cast<int>(sensor_cols.size());
            t.records = g.rows;
            t.start_index = 0;
            out.sessions.push_back(std::move(t));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Feature statistics / standardization
// ---------------------------------------------------------------------------

void FeatureStats::add_row(const SessionTrace& trace, int row) {
    if (sum_.empty()) {
        sum_.assign(static_cast<std::size_t>(trace.cols), 0.0);
        sumsq_.assign(static_cast<std::size_t>(trace.cols), 0.0);
        minv_.assign(static_cast<std::size_t>(trace.cols), std::numeric_limits<double>::infinity());
        maxv_.assign(static_cast<std::size_t>(trace.cols), -std::numeric_limits<double>::infinity());
    }
    if (static_cast<std::size_t>(trace.cols) != sum_.size()) throw ShapeError("feature count mismatch across traces");
    for (int c = 0; c < trace.cols; ++c) {
        double v = trace.at(row, c);
        sum_[static_cast<std::size_t>(c)] += v;
        sumsq_[static_cast<std::size_t>(c)] += v * v;
        minv_[static_cast<std::size_t>(c)] = std::min(minv_[static_cast<std::size_t>(c)], v);
        maxv_[static_cast<std::size_t>(c)] = std::max(maxv_[static_cast<std::size_t>(c)], v);
    }
    ++count_;
}

FeatureMask FeatureStats::finalize(const std::vector<std::string>& feature_names) const {
    if (count_ < 2) throw InsufficientDataError("feature mask needs at least 2 rows");
    FeatureMask m;
    std::size_t cols = sum_.size();
    m.retained.resize(cols);
    for (std::size_t c = 0; c < cols; ++c) {
        bool keep = maxv_[c] != minv_[c]; // exactly-zero variance <=> constant column
        m.retained[c] = keep;
        std::string name = c < feature_names.size() ? feature_names[c] : "f" + std::to_string(c);
        if (keep) {
            double n = static_cast<double>(count_);
            double mean = sum_[c] / n;
            double var = std::max(0.0, sumsq_[c] / n - mean * mean);
            m.means.push_back(mean);
            m.stds.push_back(std::sqrt(var));
            m.retained_names.push_back(name);
        } else {
            m.dropped_names.push_back(name);
        }
    }
    return m;
}

FeatureMask fit_feature_mask(const RawDataset& raw) {
    FeatureStats stats;
    for (const SessionTrace& t : raw.sessions)
        for (int r = 0; r < t.rows; ++r) stats.add_row(t, r);
    return stats.finalize(raw.feature_names);
}

SessionTrace standardize(const SessionTrace& trace, const FeatureMask& mask) {
    if (static_cast<std::size_t>(trace.cols) != mask.retained.size())
        throw ShapeError("trace has " + std::to_string(trace.cols) + " columns, mask expects " +
                         std::to_string(mask.retained.size()));
    SessionTrace out;
    out.driver_id = trace.driver_id;
    out.session_id = trace.session_id;
    out.start_index = trace.start_index;
    out.rows = trace.rows;
    out.cols = mask.retained_count();
    out.records.resize(static_cast<std::size_t>(out.rows) * out.cols);
    for (int r = 0; r < trace.rows; ++r) {
        int j = 0;
        for (int c = 0; c < trace.cols; ++c) {
            if (!mask.retained[static_cast<std::size_t>(c)]) continue;
            double v = (trace.at(r, c) - mask.means[static_cast<std::size_t>(j)]) / mask.stds[static_cast<std::size_t>(j)];
            out.records[static_cast<std::size_t>(r) * out.cols + j] = v;
            ++j;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Windowing / splitting
// ---------------------------------------------------------------------------

int window_count(int rows, int length, int stride) {
    if (length < 1 || stride < 1) throw ConfigError("window length and stride must be >= 1");
    if (rows < length) return 0;
    return (rows - length) / stride + 1;
}

int make_windows(const SessionTrace& trace, int length, int stride, WindowStore& out) {
    int n = window_count(trace.rows, length, stride);
    if (out.window_length == 0) {
        out.window_length = length;
        out.features = trace.cols;
    }
    if (out.window_length != length || out.features != trace.cols)
        throw ShapeError("window shape mismatch against store");
    std::vector<float> buf(static_cast<std::size_t>(length) * trace.cols);
    for (int w = 0; w < n; ++w) {
        int start = w * stride;
        for (int r = 0; r < length; ++r)
            for (int c = 0; c < trace.cols; ++c)
                buf[static_cast<std::size_t>(r) * trace.cols + c] =
                    static_cast<float>(trace.at(start + r, c));
        out.append(buf, trace.driver_id, trace.session_id, start);
    }
    return n;
}

std::pair<int, int> split_counts(int n_windows, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train fraction must be in (0, 1)");
    int train = static_cast<int>(std::ceil(train_fraction * n_windows));
    train = std::min(train, n_windows);
    return {train, n_windows - train};
}

// ---------------------------------------------------------------------------
// Synthetic traces
// ---------------------------------------------------------------------------

RawDataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n_drivers < 1 || spec.sessions_per_driver < 1 || spec.records_per_session < 1 || spec.n_features < 1)
        throw ConfigError("all synthetic counts must be >= 1");
    Rng rng(derive_seed(spec.seed, "synthetic"));
    RawDataset out;
    out.sample_rate = 1.0;
    for (int f = 0; f < spec.n_features; ++f) out.feature_names.push_back("f" + std::to_string(f));

    std::size_t F = static_cast<std::size_t>(spec.n_features);
    for (int d = 0; d < spec.n_drivers; ++d) {
        std::vector<double> mean(F), noise(F);
        for (std::size_t f = 0; f < F; ++f) mean[f] = rng.real(-2.0, 2.0);
        double ar = rng.real(0.55, 0.9);
        for (std::size_t f = 0; f < F; ++f) noise[f] = rng.real(0.3, 0.7);
        for (int s = 1; s <= spec.sessions_per_driver; ++s) {
            std::vector<double> offset(F);
            for (std::size_t f = 0; f < F; ++f) offset[f] = 0.15 * rng.normal();
            SessionTrace t;
            t.driver_id = d;
            t.session_id = s;
            t.rows = spec.records_per_session;
            t.cols = spec.n_features;
            t.records.resize(static_cast<std::size_t>(t.rows) * F);
            std::vector<double> x(F);
            for (std::size_t f = 0; f < F; ++f) x[f] = mean[f] + offset[f];
            for (int r = 0; r < t.rows; ++r) {
                for (std::size_t f = 0; f < F; ++f) {
                    double mu = mean[f] + offset[f];
                    x[f] = mu + ar * (x[f] - mu) + noise[f] * rng.normal();
                    t.records[static_cast<std::size_t>(r) * F + f] = x[f];
                }
            }
            out.sessions.push_back(std::move(t));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Full preparation pipeline
// ---------------------------------------------------------------------------

namespace {

// rows covered by the training windows of one session
int train_row_limit(int n_windows, int train_windows, int length, int stride) {
    if (train_windows <= 0) return 0;
    (void)n_windows;
    return (train_windows - 1) * stride + length;
}

} // namespace

PreparedDataset prepare_dataset(const RawDataset& raw, const PrepareOptions& opts) {
    if (raw.sessions.empty()) throw ConfigError("dataset has no sessions");
    int cols = raw.sessions.front().cols;
    for (const SessionTrace& t : raw.sessions)
        if (t.cols != cols) throw ShapeError("sessions disagree on feature dimensionality");

    // sessions sorted by (driver, session)
    std::vector<const SessionTrace*> order;
    for (const SessionTrace& t : raw.sessions) order.push_back(&t);
    std::sort(order.begin(), order.end(), [](const SessionTrace* a, const SessionTrace* b) {
        return std::make_pair(a->driver_id, a->session_id) < std::make_pair(b->driver_id, b->session_id);
    });

    // per-session window and split counts (independent of the mask)
    struct Plan {
        const SessionTrace* trace;
        int n_windows, n_train, n_test;
        std::vector<int> train_offsets, test_offsets;
    };
    std::vector<Plan> plans;
    Rng split_rng(derive_seed(opts.split_seed, "split"));
    for (const SessionTrace* t : order) {
        Plan p;
        p.trace = t;
        p.n_windows = window_count(t->rows, opts.window_length, opts.stride);
        auto [ntr, nte] = split_counts(p.n_windows, opts.train_fraction);
        p.n_train = ntr;
        p.n_test = nte;
        if (opts.split_mode == SplitMode::Chronological) {
            for (int w = 0; w < p.n_train; ++w) p.train_offsets.push_back(w * opts.stride);
            for (int w = p.n_train; w < p.n_windows; ++w) p.test_offsets.push_back(w * opts.stride);
        } else {
            std::vector<std::size_t> picks = split_rng.sample_without_replacement(
                static_cast<std::size_t>(p.n_windows), static_cast<std::size_t>(p.n_train));
            std::vector<bool> is_train(static_cast<std::size_t>(p.n_windows), false);
            for (std::size_t i : picks) is_train[i] = true;
            for (int w = 0; w < p.n_windows; ++w)
                (is_train[static_cast<std::size_t>(w)] ? p.train_offsets : p.test_offsets).push_back(w * opts.stride);
        }
        plans.push_back(std::move(p));
    }

    // mask fitted on training rows only
    FeatureStats stats;
    for (const Plan& p : plans) {
        if (opts.split_mode == SplitMode::Chronological) {
            int limit = std::min(p.trace->rows, train_row_limit(p.n_windows, p.n_train, opts.window_length, opts.stride));
            for (int r = 0; r < limit; ++r) stats.add_row(*p.trace, r);
        } else {
            std::vector<bool> covered(static_cast<std::size_t>(p.trace->rows), false);
            for (int off : p.train_offsets)
                for (int r = off; r < off + opts.window_length; ++r) covered[static_cast<std::size_t>(r)] = true;
            for (int r = 0; r < p.trace->rows; ++r)
                if (covered[static_cast<std::size_t>(r)]) stats.add_row(*p.trace, r);
        }
    }
    PreparedDataset ds;
    ds.mask = stats.finalize(raw.feature_names);
    ds.window_length = opts.window_length;
    ds.stride = opts.stride;
    ds.train_fraction = opts.train_fraction;
    ds.train.window_length = opts.window_length;
    ds.train.features = ds.mask.retained_count();
    ds.test.window_length = opts.window_length;
    ds.test.features = ds.mask.retained_count();

    std::set<int> drivers;
    std::vector<float> buf(static_cast<std::size_t>(opts.window_length) * ds.mask.retained_count());
    for (const Plan& p : plans) {
        SessionTrace z = standardize(*p.trace, ds.mask);
        SessionRange range;
        range.driver = z.driver_id;
        range.session = z.session_id;
        range.train_begin = static_cast<std::uint32_t>(ds.train.size());
        for (int off : p.train_offsets) {
            for (int r = 0; r < opts.window_length; ++r)
                for (int c = 0; c < z.cols; ++c)
                    buf[static_cast<std::size_t>(r) * z.cols + c] = static_cast<float>(z.at(off + r, c));
            ds.train.append(buf, z.driver_id, z.session_id, off);
        }
        range.train_end = static_cast<std::uint32_t>(ds.train.size());
        range.test_begin = static_cast<std::uint32_t>(ds.test.size());
        for (int off : p.test_offsets) {
            for (int r = 0; r < opts.window_length; ++r)
                for (int c = 0; c < z.cols; ++c)
                    buf[static_cast<std::size_t>(r) * z.cols + c] = static_cast<float>(z.at(off + r, c));
            ds.test.append(buf, z.driver_id, z.session_id, off);
        }
        range.test_end = static_cast<std::uint32_t>(ds.test.size());
        ds.sessions.push_back(range);
        drivers.insert(z.driver_id);
    }
    ds.driver_ids.assign(drivers.begin(), drivers.end());

    Fnv1a h;
    h.update_u64(static_cast<std::uint64_t>(ds.window_length));
    h.update_u64(static_cast<std::uint64_t>(ds.stride));
    h.update_u64(static_cast<std::uint64_t>(ds.mask.retained_count()));
    for (const WindowStore* s : {&ds.train, &ds.test}) {
        h.update_u64(s->size());
        h.update(s->values.data(), s->values.size() * sizeof(float));
        h.update(s->labels.data(), s->labels.size() * sizeof(std::int32_t));
        h.update(s->session_ids.data(), s->session_ids.size() * sizeof(std::int32_t));
        h.update(s->start_indices.data(), s->start_indices.size() * sizeof(std::int32_t));
    }
    ds.content_hash = h.digest();
    return ds;
}

// ---------------------------------------------------------------------------
// PreparedDataset queries & persistence
// ---------------------------------------------------------------------------

std::vector<SessionWindowCounts> PreparedDataset::manifest() const {
    std::vector<SessionWindowCounts> rows;
    for (const SessionRange& r : sessions)
        rows.push_back({r.driver, r.session, static_cast<int>(r.train_end - r.train_begin),
                        static_cast<int>(r.test_end - r.test_begin)});
    return rows;
}

const SessionRange& PreparedDataset::session(int driver, int session_id) const {
    for (const SessionRange& r : sessions)
        if (r.driver == driver && r.session == session_id) return r;
    throw IndexError("no session (" + std::to_string(driver) + ", " + std::to_string(session_id) + ")");
}

int PreparedDataset::sessions_per_driver(int driver) const {
    int n = 0;
    for (const SessionRange& r : sessions)
        if (r.driver == driver) ++n;
    return n;
}

namespace {

void write_store(std::ostream& os, const WindowStore& s) {
    io::write_i32(os, s.window_length);
    io::write_i32(os, s.features);
    io::write_u64(os, s.size());
    io::write_f32_array(os, s.values.data(), s.values.size());
    io::write_i32_array(os, s.labels.data(), s.labels.size());
    io::write_i32_array(os, s.session_ids.data(), s.session_ids.size());
    io::write_i32_array(os, s.start_indices.data(), s.start_indices.size());
}

WindowStore read_store(std::istream& is) {
    WindowStore s;
    s.window_length = io::read_i32(is);
    s.features = io::read_i32(is);
    std::uint64_t n = io::read_u64(is);
    s.values.resize(n * static_cast<std::uint64_t>(s.window_length) * static_cast<std::uint64_t>(s.features));
    s.labels.resize(n);
    s.session_ids.resize(n);
    s.start_indices.resize(n);
    io::read_f32_array(is, s.values.data(), s.values.size());
    io::read_i32_array(is, s.labels.data(), s.labels.size());
    io::read_i32_array(is, s.session_ids.data(), s.session_ids.size());
    io::read_i32_array(is, s.start_indices.data(), s.start_indices.size());
    return s;
}

constexpr char kDatasetMagic[] = "CANIDDS1";

} // namespace

void PreparedDataset::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    mask.save_json(dir / "feature_mask.json");

    json man;
    man["sessions"] = json::array();
    for (const SessionWindowCounts& c : manifest())
        man["sessions"].push_back({{"driver", c.driver}, {"session", c.session}, {"train_windows", c.train}, {"test_windows", c.test}});
    man["window_length"] = window_length;
    man["stride"] = stride;
    man["train_fraction"] = train_fraction;
    man["features"] = mask.retained_count();
    man["content_hash"] = hex64(content_hash);
    {
        std::ofstream os(dir / "manifest.json");
        if (!os) throw IoError("cannot write manifest");
        os << man.dump(2) << '\n';
    }

    std::ofstream os(dir / "dataset.bin", std::ios::binary);
    if (!os) throw IoError("cannot write dataset.bin");
    os.write(kDatasetMagic, 8);
    io::write_u32(os, 1);
    io::write_i32(os, window_length);
    io::write_i32(os, stride);
    io::write_u64(os, std::bit_cast<std::uint64_t>(train_fraction));
    io::write_u64(os, static_cast<std::uint64_t>(driver_ids.size()));
    for (int d : driver_ids) io::write_i32(os, d);
    io::write_u64(os, static_cast<std::uint64_t>(sessions.size()));
    for (const SessionRange& r : sessions) {
        io::write_i32(os, r.driver);
        io::write_i32(os, r.session);
        io::write_u32(os, r.train_begin);
        io::write_u32(os, r.train_end);
        io::write_u32(os, r.test_begin);
        io::write_u32(os, r.test_end);
    }
    write_store(os, train);
    write_store(os, test);
    io::write_u64(os, content_hash);
}

PreparedDataset PreparedDataset::load(const std::filesystem::path& dir) {
    std::ifstream is(dir / "dataset.bin", std::ios::binary);
    if (!is) throw IoError("cannot open prepared dataset: " + (dir / "dataset.bin").string());
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kDatasetMagic, 8) != 0) throw ParseError("not a prepared dataset file");
    std::uint32_t version = io::read_u32(is);
    if (version != 1) throw ParseError("unsupported dataset version " + std::to_string(version));
    PreparedDataset ds;
    ds.window_length = io::read_i32(is);
    ds.stride = io::read_i32(is);
    ds.train_fraction = std::bit_cast<double>(io::read_u64(is));
    std::uint64_t nd = io::read_u64(is);
    for (std::uint64_t i = 0; i < nd; ++i) ds.driver_ids.push_back(io::read_i32(is));
    std::uint64_t ns = io::read_u64(is);
    for (std::uint64_t i = 0; i < ns; ++i) {
        SessionRange r;
        r.driver = io::read_i32(is);
        r.session = io::read_i32(is);
        r.train_begin = io::read_u32(is);
        r.train_end = io::read_u32(is);
        r.test_begin = io::read_u32(is);
        r.test_end = io::read_u32(is);
        ds.sessions.push_back(r);
    }
    ds.train = read_store(is);
    ds.test = read_store(is);
    ds.content_hash = io::read_u64(is);
    ds.mask = FeatureMask::load_json(dir / "feature_mask.json");
    return ds;
}

} // namespace canid
