#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "sbs/errors.hpp"

namespace sbs {

// Little-endian binary writer. The host is assumed little-endian (checked once
// at stream construction) so bulk float arrays can be written directly.
class BinWriter {
public:
    explicit BinWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw IoError("cannot open for writing: " + path);
        const uint16_t probe = 1;
        if (*reinterpret_cast<const uint8_t*>(&probe) != 1)
            throw IoError("big-endian hosts are not supported");
    }

    void bytes(const void* p, size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
    void u8(uint8_t v) { bytes(&v, 1); }
    void u16(uint16_t v) { bytes(&v, 2); }
    void u32(uint32_t v) { bytes(&v, 4); }
    void u64(uint64_t v) { bytes(&v, 8); }
    void f32(float v) { bytes(&v, 4); }
    void f32s(const float* p, size_t n) { bytes(p, 4 * n); }
    void magic(const char tag[4]) { bytes(tag, 4); }

    void close() {
        out_.close();
        if (!out_) throw IoError("write failed on close");
    }

private:
    std::ofstream out_;
};

class BinReader {
public:
    explicit BinReader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
        if (!in_) throw IoError("cannot open: " + path);
    }

    void bytes(void* p, size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<size_t>(in_.gcount()) != n)
            throw IoError("truncated file " + path_ + " at byte offset " + std::to_string(offset_ + static_cast<size_t>(in_.gcount())));
        offset_ += n;
    }
    uint8_t u8() { uint8_t v; bytes(&v, 1); return v; }
    uint16_t u16() { uint16_t v; bytes(&v, 2); return v; }
    uint32_t u32() { uint32_t v; bytes(&v, 4); return v; }
    uint64_t u64() { uint64_t v; bytes(&v, 8); return v; }
    float f32() { float v; bytes(&v, 4); return v; }
    void f32s(float* p, size_t n) { bytes(p, 4 * n); }

    void expect_magic(const char tag[4], const std::string& what) {
        char got[4];
        bytes(got, 4);
        if (std::memcmp(got, tag, 4) != 0)
            throw IoError("bad magic in " + path_ + ": not a " + what + " file");
    }

    size_t offset() const { return offset_; }
    bool at_eof() { return in_.peek() == std::char_traits<char>::eof(); }

private:
    std::ifstream in_;
    std::string path_;
    size_t offset_ = 0;
};

// FNV-1a, used for cheap content identities in reports.
inline uint64_t fnv1a(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const uint8_t*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline uint64_t hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof buf);
        h = fnv1a(buf, static_cast<size_t>(in.gcount()), h);
    }
    return h;
}

}  // namespace sbs
