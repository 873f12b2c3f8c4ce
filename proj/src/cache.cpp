#include "frd/cache.hpp"

#include "frd/errors.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace frd {

namespace {

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint32_t get_u32(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

constexpr std::size_t header_bytes = 4 + 7 * 4 + 8 + 8;

} // namespace

std::uint64_t fnv1a64(const unsigned char* data, std::size_t n) {
    std::uint64_t h = 14695981039346656037ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::string CacheHeader::key() const {
    static const char* names[] = {"", "poisson", "averaging", "kernel", "symbol"};
    const auto k = static_cast<std::uint32_t>(kind);
    std::ostringstream os;
    os << (k < 5 ? names[k] : "unknown") << "-d" << d << "-L" << L << "-n" << n << "-m" << m << "-g" << geometry
       << "-a" << std::hex << std::bit_cast<std::uint64_t>(a);
    return os.str();
}

std::vector<unsigned char> encode_cache(const CacheHeader& h, const std::vector<double>& payload) {
    std::vector<unsigned char> out;
    out.reserve(header_bytes + 8 * payload.size() + 8);
    for (char c : {'F', 'R', 'D', '1'}) out.push_back(static_cast<unsigned char>(c));
    put_u32(out, h.version);
    put_u32(out, static_cast<std::uint32_t>(h.kind));
    put_u32(out, static_cast<std::uint32_t>(h.d));
    put_u32(out, static_cast<std::uint32_t>(h.L));
    put_u32(out, static_cast<std::uint32_t>(h.n));
    put_u32(out, static_cast<std::uint32_t>(h.m));
    put_u32(out, h.geometry);
    put_u64(out, std::bit_cast<std::uint64_t>(h.a));
    put_u64(out, payload.size());
    for (double v : payload) put_u64(out, std::bit_cast<std::uint64_t>(v));
    put_u64(out, fnv1a64(out.data(), out.size()));
    return out;
}

std::optional<std::pair<CacheHeader, std::vector<double>>> decode_cache(const std::vector<unsigned char>& b) {
    if (b.size() < header_bytes + 8) return std::nullopt;
    if (std::memcmp(b.data(), "FRD1", 4) != 0) return std::nullopt;
    const unsigned char* p = b.data() + 4;
    CacheHeader h;
    h.version = get_u32(p);
    h.kind = static_cast<CacheKind>(get_u32(p + 4));
    h.d = static_cast<std::int32_t>(get_u32(p + 8));
    h.L = static_cast<std::int32_t>(get_u32(p + 12));
    h.n = static_cast<std::int32_t>(get_u32(p + 16));
    h.m = static_cast<std::int32_t>(get_u32(p + 20));
    h.geometry = get_u32(p + 24);
    h.a = std::bit_cast<double>(get_u64(p + 28));
    const std::uint64_t count = get_u64(p + 36);
    if (count > (b.size() - header_bytes - 8) / 8 || b.size() != header_bytes + 8 * count + 8) return std::nullopt;
    const std::size_t body = header_bytes + 8 * count;
    if (get_u64(b.data() + body) != fnv1a64(b.data(), body)) return std::nullopt;
    std::vector<double> payload(count);
    for (std::uint64_t i = 0; i < count; ++i)
        payload[i] = std::bit_cast<double>(get_u64(b.data() + header_bytes + 8 * i));
    return std::make_pair(h, std::move(payload));
}

void write_cache_file(const std::string& path, const CacheHeader& h, const std::vector<double>& payload) {
    const auto bytes = encode_cache(h, payload);
    const std::filesystem::path parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    const std::string tmp = path + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error("cannot write cache file " + tmp);
        os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!os) throw Error("short write on cache file " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::optional<std::pair<CacheHeader, std::vector<double>>> read_cache_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) return std::nullopt;
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return decode_cache(bytes);
}

DiskCache::DiskCache(std::string dir) : dir_(std::move(dir)) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
}

std::string DiskCache::path_for(const CacheHeader& h) const {
    return (std::filesystem::path(dir_) / (h.key() + ".frd")).string();
}

std::optional<std::vector<double>> DiskCache::load(const CacheHeader& h) const {
    if (!enabled()) return std::nullopt;
    auto r = read_cache_file(path_for(h));
    if (!r || !(r->first == h)) return std::nullopt;
    return std::move(r->second);
}

void DiskCache::store(const CacheHeader& h, const std::vector<double>& payload) const {
    if (enabled()) write_cache_file(path_for(h), h, payload);
}

bool DiskCache::contains(const CacheHeader& h) const { return load(h).has_value(); }

} // namespace frd
