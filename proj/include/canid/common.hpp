#pragma once
// Shared plumbing: error taxonomy, deterministic random source, seed
// derivation, content hashing, little-endian binary IO.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace canid {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IndexError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InsufficientDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Seeding & hashing
// ---------------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view s);

// Derive an independent sub-seed from a base seed, a stream tag and a salt.
// All randomness in the framework flows through named derivations so a run
// interrupted at a task boundary resumes on exactly the same streams.
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t salt = 0);

// Incremental FNV-1a over raw bytes, used for dataset/content hashes.
class Fnv1a {
  public:
    void update(const void* data, std::size_t n);
    void update_u64(std::uint64_t v);
    std::uint64_t digest() const { return state_; }

  private:
    std::uint64_t state_ = 1469598103934665603ull;
};

std::string hex64(std::uint64_t v);

// ---------------------------------------------------------------------------
// Deterministic random source
// ---------------------------------------------------------------------------

// mt19937_64 is fully specified by the standard; the distributions are
// implemented here because the std:: ones are not bit-reproducible across
// library implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform integer in [0, n); n must be > 0
    std::size_t index(std::size_t n);

    // uniform double in [0, 1)
    double real();

    // uniform double in [lo, hi)
    double real(double lo, double hi) { return lo + (hi - lo) * real(); }

    // standard normal via Box-Muller
    double normal();

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = index(i + 1);
            std::swap(v[i], v[j]);
        }
    }

    // k distinct positions sampled uniformly from [0, n), in random order
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// ---------------------------------------------------------------------------
// Little-endian binary IO (checkpoints, prepared datasets, strategy state)
// ---------------------------------------------------------------------------

namespace io {

void write_u32(std::ostream& os, std::uint32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
void write_i32(std::ostream& os, std::int32_t v);
void write_f32(std::ostream& os, float v);
void write_f32_array(std::ostream& os, const float* data, std::size_t n);
void write_i32_array(std::ostream& os, const std::int32_t* data, std::size_t n);
void write_string(std::ostream& os, std::string_view s);

std::uint32_t read_u32(std::istream& is);
std::uint64_t read_u64(std::istream& is);
std::int32_t read_i32(std::istream& is);
float read_f32(std::istream& is);
void read_f32_array(std::istream& is, float* data, std::size_t n);
void read_i32_array(std::istream& is, std::int32_t* data, std::size_t n);
std::string read_string(std::istream& is);

} // namespace io

} // namespace canid
