#pragma once

#include <algorithm>
#include <cctype>
#include <csetjmp>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <png.h>

#include "pbp/error.hpp"
#include "pbp/image.hpp"

namespace pbp {

// Decoded container samples before normalization.
struct RawRaster {
    std::size_t height = 0;
    std::size_t width = 0;
    int channels = 0;   // 1 or 3 after alpha stripping
    int bit_depth = 0;  // 8 or 16
    std::vector<std::uint16_t> samples;  // row-major, interleaved
};

namespace detail {

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad())
        throw IoError("read failed for '" + path.string() + "'");
    return bytes;
}

class PnmCursor {
public:
    explicit PnmCursor(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    // Next whitespace-delimited header token, skipping '#' comments.
    std::string token() {
        for (;;) {
            while (pos_ < bytes_.size() && std::isspace(bytes_[pos_]))
                ++pos_;
            if (pos_ < bytes_.size() && bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n')
                    ++pos_;
                continue;
            }
            break;
        }
        std::string tok;
        while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]) && bytes_[pos_] != '#')
            tok.push_back(static_cast<char>(bytes_[pos_++]));
        if (tok.empty())
            throw FormatError("truncated PNM header");
        return tok;
    }

    std::size_t number() {
        const std::string tok = token();
        if (!std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
            throw FormatError("malformed PNM header field '" + tok + "'");
        if (tok.size() > 9)
            throw FormatError("PNM header field out of range");
        return std::stoul(tok);
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_start() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
            throw FormatError("truncated PNM header");
        return pos_ + 1;
    }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

inline RawRaster decode_pnm(const std::vector<std::uint8_t>& bytes) {
    PnmCursor cur(bytes);
    const std::string magic = cur.token();
    int channels = 0;
    if (magic == "P6")
        channels = 3;
    else if (magic == "P5")
        channels = 1;
    else
        throw FormatError("unsupported PNM variant '" + magic + "' (binary P5/P6 only)");

    RawRaster r;
    r.width = cur.number();
    r.height = cur.number();
    const std::size_t maxval = cur.number();
    if (r.width == 0 || r.height == 0)
        throw FormatError("zero-dimension image");
    if (maxval == 255)
        r.bit_depth = 8;
    else if (maxval == 65535)
        r.bit_depth = 16;
    else
        throw FormatError("unsupported PNM maxval " + std::to_string(maxval));
    r.channels = channels;

    const std::size_t start = cur.raster_start();
    const std::size_t count = r.width * r.height * static_cast<std::size_t>(channels);
    const std::size_t bytes_per = r.bit_depth == 16 ? 2 : 1;
    if (bytes.size() < start + count * bytes_per)
        throw FormatError("truncated PNM raster");
    r.samples.resize(count);
    const std::uint8_t* p = bytes.data() + start;
    if (bytes_per == 1) {
        for (std::size_t i = 0; i < count; ++i)
            r.samples[i] = p[i];
    } else {
        for (std::size_t i = 0; i < count; ++i)
            r.samples[i] = static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1]);
    }
    return r;
}

struct PngMemoryReader {
    const std::vector<std::uint8_t>* bytes;
    std::size_t pos;
};

inline void png_read_from_memory(png_structp png, png_bytep out, png_size_t n) {
    auto* src = static_cast<PngMemoryReader*>(png_get_io_ptr(png));
    if (src->pos + n > src->bytes->size())
        png_error(png, "truncated PNG stream");
    std::memcpy(out, src->bytes->data() + src->pos, n);
    src->pos += n;
}

inline void png_error_to_longjmp(png_structp png, png_const_charp msg) {
    auto* buf = static_cast<char*>(png_get_error_ptr(png));
    std::strncpy(buf, msg, 255);
    buf[255] = '\0';
    png_longjmp(png, 1);
}

inline void png_warning_ignore(png_structp, png_const_charp) {}

inline RawRaster decode_png(const std::vector<std::uint8_t>& bytes) {
    // No object with a nontrivial destructor may be created between setjmp
    // and the last libpng call, so every allocation happens up front or is
    // owned by the RawRaster declared here.
    char message[256] = {0};
    RawRaster r;
    std::vector<png_bytep> rows;
    PngMemoryReader reader{&bytes, 0};
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, message, png_error_to_longjmp, png_warning_ignore);
    if (!png)
        throw FormatError("libpng initialization failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw FormatError("libpng initialization failed");
    }
    std::vector<std::uint8_t> buffer;
    volatile bool unsupported = false;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError(std::string("PNG decode failed: ") + message);
    }
    png_set_read_fn(png, &reader, png_read_from_memory);
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int depth = png_get_bit_depth(png, info);
    const int color = png_get_color_type(png, info);

    if (color == PNG_COLOR_TYPE_PALETTE || (depth != 8 && depth != 16)) {
        unsupported = true;
    } else {
        if (color & PNG_COLOR_MASK_ALPHA)
            png_set_strip_alpha(png);
        if (depth == 16)
            png_set_swap(png);  // native little-endian uint16
        png_read_update_info(png, info);
        r.width = width;
        r.height = height;
        r.bit_depth = depth;
        r.channels = (color & PNG_COLOR_MASK_COLOR) ? 3 : 1;
        const std::size_t rowbytes = png_get_rowbytes(png, info);
        buffer.resize(rowbytes * height);
        rows.resize(height);
        for (png_uint_32 y = 0; y < height; ++y)
            rows[y] = buffer.data() + y * rowbytes;
        png_read_image(png, rows.data());
        png_read_end(png, nullptr);
    }
    png_destroy_read_struct(&png, &info, nullptr);

    if (unsupported)
        throw FormatError("unsupported PNG layout (palette or bit depth other than 8/16)");
    if (r.width == 0 || r.height == 0)
        throw FormatError("zero-dimension image");
    const std::size_t count = r.width * r.height * static_cast<std::size_t>(r.channels);
    r.samples.resize(count);
    if (r.bit_depth == 8) {
        for (std::size_t i = 0; i < count; ++i)
            r.samples[i] = buffer[i];
    } else {
        std::memcpy(r.samples.data(), buffer.data(), count * 2);
    }
    return r;
}

inline bool has_png_signature(const std::vector<std::uint8_t>& bytes) {
    return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

inline void png_write_to_stream(png_structp png, png_bytep data, png_size_t n) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + n);
}

inline void png_flush_noop(png_structp) {}

inline std::vector<std::uint8_t> encode_png(std::size_t height, std::size_t width, int channels, int bit_depth,
                                            const std::vector<std::uint16_t>& samples) {
    char message[256] = {0};
    std::vector<std::uint8_t> encoded;
    std::vector<std::uint8_t> buffer;
    std::vector<png_bytep> rows;
    const std::size_t bytes_per = bit_depth == 16 ? 2 : 1;
    const std::size_t rowbytes = width * static_cast<std::size_t>(channels) * bytes_per;
    buffer.resize(rowbytes * height);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (bytes_per == 1) {
            buffer[i] = static_cast<std::uint8_t>(samples[i]);
        } else {
            buffer[2 * i] = static_cast<std::uint8_t>(samples[i] >> 8);
            buffer[2 * i + 1] = static_cast<std::uint8_t>(samples[i] & 0xff);
        }
    }
    rows.resize(height);
    for (std::size_t y = 0; y < height; ++y)
        rows[y] = buffer.data() + y * rowbytes;

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, message, png_error_to_longjmp, png_warning_ignore);
    if (!png)
        throw IoError("libpng initialization failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError(std::string("PNG encode failed: ") + message);
    }
    png_set_write_fn(png, &encoded, png_write_to_stream, png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
                 channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return encoded;
}

inline void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("write failed for '" + path.string() + "'");
}

inline std::vector<std::uint16_t> to_samples(const LinearImage& image, int bit_depth) {
    const double full = bit_depth == 16 ? 65535.0 : 255.0;
    std::vector<std::uint16_t> samples(image.data().size());
    auto data = image.data();
    for (std::size_t i = 0; i < samples.size(); ++i)
        samples[i] = static_cast<std::uint16_t>(std::lround(std::clamp(data[i], 0.0, 1.0) * full));
    return samples;
}

} // namespace detail

// Reads a PNG (8/16-bit) or binary PNM (P5/P6) file without normalizing.
inline RawRaster read_raster(const std::filesystem::path& path) {
    const auto bytes = detail::read_file_bytes(path);
    if (detail::has_png_signature(bytes))
        return detail::decode_png(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'P')
        return detail::decode_pnm(bytes);
    throw FormatError("'" + path.string() + "' is neither PNG nor binary PNM");
}

// Loads a linear RGB image normalized to [0,1] by 2^bits - 1, where bits is
// config.source_bit_depth or the container depth when that is 0. Samples above
// the source full scale are clamped to 1. Mask starts all-true.
inline LinearImage load_image(const std::filesystem::path& path, const PreprocessConfig& config = {}) {
    config.validate();
    const RawRaster raw = read_raster(path);
    if (raw.channels != 3)
        throw FormatError("'" + path.string() + "' is not an RGB image");
    const int bits = config.source_bit_depth > 0 ? config.source_bit_depth : raw.bit_depth;
    if (bits > raw.bit_depth)
        throw FormatError("source bit depth exceeds container bit depth");
    const double full = static_cast<double>((1u << bits) - 1u);
    std::vector<double> data(raw.samples.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        data[i] = std::min(1.0, raw.samples[i] / full);
    return LinearImage(raw.height, raw.width, std::move(data));
}

// Single-channel PNG/PGM validity mask; nonzero = valid.
inline std::vector<std::uint8_t> load_mask(const std::filesystem::path& path, std::size_t height, std::size_t width) {
    const RawRaster raw = read_raster(path);
    if (raw.channels != 1)
        throw FormatError("mask '" + path.string() + "' must be single-channel");
    if (raw.height != height || raw.width != width)
        throw FormatError("mask '" + path.string() + "' does not match the image extent");
    std::vector<std::uint8_t> valid(raw.samples.size());
    for (std::size_t i = 0; i < valid.size(); ++i)
        valid[i] = raw.samples[i] != 0 ? 1 : 0;
    return valid;
}

// Writes RGB data clamped to [0,1] and scaled to the container range. Apply
// quantize_8bit / gamma_encode beforehand for display output.
inline void save_png(const LinearImage& image, const std::filesystem::path& path, int bit_depth = 8) {
    if (bit_depth != 8 && bit_depth != 16)
        throw ParameterError("PNG output supports 8 or 16 bits");
    detail::write_file_bytes(path, detail::encode_png(image.height(), image.width(), 3, bit_depth,
                                                      detail::to_samples(image, bit_depth)));
}

inline void save_ppm(const LinearImage& image, const std::filesystem::path& path, int bit_depth = 8) {
    if (bit_depth != 8 && bit_depth != 16)
        throw ParameterError("PPM output supports 8 or 16 bits");
    const auto samples = detail::to_samples(image, bit_depth);
    std::string header = "P6\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n" +
                         (bit_depth == 16 ? "65535" : "255") + "\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    for (std::uint16_t s : samples) {
        if (bit_depth == 16)
            bytes.push_back(static_cast<std::uint8_t>(s >> 8));
        bytes.push_back(static_cast<std::uint8_t>(s & 0xff));
    }
    detail::write_file_bytes(path, bytes);
}

// Writes a validity mask as an 8-bit grayscale PNG (255 = valid).
inline void save_mask_png(std::span<const std::uint8_t> mask, std::size_t height, std::size_t width,
                          const std::filesystem::path& path) {
    if (mask.size() != height * width)
        throw DimensionError("mask extent mismatch");
    std::vector<std::uint16_t> samples(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i)
        samples[i] = mask[i] ? 255 : 0;
    detail::write_file_bytes(path, detail::encode_png(height, width, 1, 8, samples));
}

} // namespace pbp
