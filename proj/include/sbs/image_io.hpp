#pragma once

#include <zlib.h>

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "sbs/errors.hpp"
#include "sbs/render.hpp"

namespace sbs {

namespace detail {

inline void png_be32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

inline void png_chunk(std::vector<uint8_t>& out, const char type[4],
                      const std::vector<uint8_t>& data) {
    png_be32(out, static_cast<uint32_t>(data.size()));
    const size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    const uint32_t crc = static_cast<uint32_t>(
        ::crc32(0, out.data() + start, static_cast<uInt>(out.size() - start)));
    png_be32(out, crc);
}

}  // namespace detail

// Minimal 8-bit RGB PNG encoder (no alpha, no interlace).
inline std::vector<uint8_t> encode_png(const uint8_t* rgb, int width, int height) {
    std::vector<uint8_t> out{137, 80, 78, 71, 13, 10, 26, 10};
    std::vector<uint8_t> ihdr;
    detail::png_be32(ihdr, static_cast<uint32_t>(width));
    detail::png_be32(ihdr, static_cast<uint32_t>(height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // color type: truecolor
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    detail::png_chunk(out, "IHDR", ihdr);

    // Filter byte 0 (None) in front of every scanline.
    std::vector<uint8_t> raw(static_cast<size_t>(height) * (1 + 3 * width));
    for (int y = 0; y < height; ++y) {
        uint8_t* row = raw.data() + static_cast<size_t>(y) * (1 + 3 * width);
        row[0] = 0;
        std::copy(rgb + static_cast<size_t>(y) * 3 * width,
                  rgb + static_cast<size_t>(y + 1) * 3 * width, row + 1);
    }
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<uint8_t> compressed(bound);
    if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw IoError("png: deflate failed");
    compressed.resize(bound);
    detail::png_chunk(out, "IDAT", compressed);
    detail::png_chunk(out, "IEND", {});
    return out;
}

inline void write_png(const std::string& path, const uint8_t* rgb, int width, int height) {
    const std::vector<uint8_t> bytes = encode_png(rgb, width, height);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed: " + path);
}

inline void write_png(const std::string& path, const LabeledImage& img) {
    write_png(path, img.rgb.data(), img.width, img.height);
}

}  // namespace sbs
