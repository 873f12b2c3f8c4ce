#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace frd {

enum class CacheKind : std::uint32_t { poisson = 1, averaging = 2, kernel = 3, symbol = 4 };

struct CacheHeader {
    std::uint32_t version = 1;
    CacheKind kind = CacheKind::poisson;
    std::int32_t d = 3;
    std::int32_t L = 2;
    std::int32_t n = 0;
    std::int32_t m = 0;
    std::uint32_t geometry = 0;  // bit 0: tight geometry, bit 1: unit mass term
    double a = 0.0;

    bool operator==(const CacheHeader&) const = default;
    std::string key() const;  // file stem, unique per header
};

// Layout: "FRD1", version, kind, d, L, n, m, geometry (4-byte little-endian integers),
// a (8-byte IEEE-754 little-endian), payload count (8 bytes), payload doubles,
// FNV-1a 64 checksum of everything before it.
std::vector<unsigned char> encode_cache(const CacheHeader& h, const std::vector<double>& payload);
// Empty optional on bad magic, truncation or checksum mismatch.
std::optional<std::pair<CacheHeader, std::vector<double>>> decode_cache(const std::vector<unsigned char>& bytes);

std::uint64_t fnv1a64(const unsigned char* data, std::size_t n);

// Atomic write: temporary file in the same directory, then rename.
void write_cache_file(const std::string& path, const CacheHeader& h, const std::vector<double>& payload);
std::optional<std::pair<CacheHeader, std::vector<double>>> read_cache_file(const std::string& path);

class DiskCache {
public:
    DiskCache() = default;
    explicit DiskCache(std::string dir);

    bool enabled() const { return !dir_.empty(); }
    const std::string& dir() const { return dir_; }
    std::string path_for(const CacheHeader& h) const;
    // Returns the payload when a valid entry with exactly this header exists.
    std::optional<std::vector<double>> load(const CacheHeader& h) const;
    void store(const CacheHeader& h, const std::vector<double>& payload) const;
    bool contains(const CacheHeader& h) const;

private:
    std::string dir_;
};

} // namespace frd
