#include "canid/common.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

namespace canid {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t salt) {
    std::uint64_t h = splitmix64(base);
    h = splitmix64(h ^ fnv1a64(tag));
    h = splitmix64(h ^ salt);
    return h;
}

void Fnv1a::update(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = state_;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    state_ = h;
}

void Fnv1a::update_u64(std::uint64_t v) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    update(bytes, 8);
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

std::size_t Rng::index(std::size_t n) {
    // rejection sampling to stay unbiased
    std::uint64_t bound = n;
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
}

double Rng::real() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    do {
        u1 = real();
    } while (u1 <= 0.0);
    double u2 = real();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
    if (k > n) k = n;
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    // partial Fisher-Yates: the first k entries form the sample
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + index(n - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

namespace io {

namespace {

void put_bytes_le(std::ostream& os, std::uint64_t v, int nbytes) {
    char buf[8];
    for (int i = 0; i < nbytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(buf, nbytes);
}

std::uint64_t get_bytes_le(std::istream& is, int nbytes) {
    unsigned char buf[8];
    is.read(reinterpret_cast<char*>(buf), nbytes);
    if (!is) throw IoError("unexpected end of stream");
    std::uint64_t v = 0;
    for (int i = 0; i < nbytes; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

} // namespace

void write_u32(std::ostream& os, std::uint32_t v) { put_bytes_le(os, v, 4); }
void write_u64(std::ostream& os, std::uint64_t v) { put_bytes_le(os, v, 8); }
void write_i32(std::ostream& os, std::int32_t v) { put_bytes_le(os, static_cast<std::uint32_t>(v), 4); }
void write_f32(std::ostream& os, float v) { put_bytes_le(os, std::bit_cast<std::uint32_t>(v), 4); }

void write_f32_array(std::ostream& os, const float* data, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * 4));
    } else {
        for (std::size_t i = 0; i < n; ++i) write_f32(os, data[i]);
    }
}

void write_i32_array(std::ostream& os, const std::int32_t* data, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * 4));
    } else {
        for (std::size_t i = 0; i < n; ++i) write_i32(os, data[i]);
    }
}

void write_string(std::ostream& os, std::string_view s) {
    write_u64(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t read_u32(std::istream& is) { return static_cast<std::uint32_t>(get_bytes_le(is, 4)); }
std::uint64_t read_u64(std::istream& is) { return get_bytes_le(is, 8); }
std::int32_t read_i32(std::istream& is) { return static_cast<std::int32_t>(static_cast<std::uint32_t>(get_bytes_le(is, 4))); }
float read_f32(std::istream& is) { return std::bit_cast<float>(static_cast<std::uint32_t>(get_bytes_le(is, 4))); }

void read_f32_array(std::istream& is, float* data, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * 4));
        if (!is) throw IoError("unexpected end of stream");
    } else {
        for (std::size_t i = 0; i < n; ++i) data[i] = read_f32(is);
    }
}

void read_i32_array(std::istream& is, std::int32_t* data, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * 4));
        if (!is) throw IoError("unexpected end of stream");
    } else {
        for (std::size_t i = 0; i < n; ++i) data[i] = read_i32(is);
    }
}

std::string read_string(std::istream& is) {
    std::uint64_t n = read_u64(is);
    if (n > (1ull << 32)) throw IoError("string length out of range");
    std::string s(static_cast<std::size_t>(n), '\0');
    is.read(s.data(), static_cast<std::streamsize>(n));
    if (!is) throw IoError("unexpected end of stream");
    return s;
}

} // namespace io

} // namespace canid
