#include "esseg/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "esseg/errors.hpp"

namespace esseg {

namespace {

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path);
    in.seekg(0, std::ios::end);
    const std::streamoff len = in.tellg();
    in.seekg(0, std::ios::beg);
    std::vector<unsigned char> bytes(static_cast<std::size_t>(len));
    if (len > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), len))
        throw io_error("cannot read " + path);
    return bytes;
}

} // namespace

void write_file_atomic(const std::string& path, const void* data, std::size_t len) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot open " + tmp + " for writing");
        out.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
        if (!out) {
            out.close();
            std::remove(tmp.c_str());
            throw io_error("cannot write " + tmp);
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw io_error("cannot move " + tmp + " to " + path);
    }
}

void write_file_atomic(const std::string& path, const std::string& text) {
    write_file_atomic(path, text.data(), text.size());
}

namespace {

struct PnmHeader {
    char kind;       // '5' or '6'
    int width, height, maxval;
    std::size_t data_offset;
};

// PNM headers are ASCII tokens separated by whitespace; '#' starts a comment
// that runs to end of line. Exactly one whitespace byte follows maxval.
PnmHeader parse_pnm_header(const std::vector<unsigned char>& bytes, const std::string& path) {
    std::size_t pos = 0;
    auto fail = [&](const std::string& why) -> PnmHeader {
        throw io_error(path + ": " + why);
    };
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
        fail("not a binary PGM/PPM file");
    PnmHeader h{};
    h.kind = static_cast<char>(bytes[1]);
    pos = 2;
    auto next_int = [&]() -> int {
        for (;;) {
            if (pos >= bytes.size()) fail("truncated header");
            const unsigned char c = bytes[pos];
            if (c == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(c)) {
                ++pos;
            } else {
                break;
            }
        }
        if (!std::isdigit(bytes[pos])) fail("malformed header");
        long v = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + (bytes[pos] - '0');
            if (v > 1 << 30) fail("header value out of range");
            ++pos;
        }
        return static_cast<int>(v);
    };
    h.width = next_int();
    h.height = next_int();
    h.maxval = next_int();
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) fail("missing whitespace after maxval");
    ++pos;
    h.data_offset = pos;
    if (h.width <= 0 || h.height <= 0) fail("non-positive dimensions");
    if (h.maxval <= 0 || h.maxval > 65535) fail("unsupported maxval");
    return h;
}

unsigned char quantize8(double v) {
    v = std::clamp(v, 0.0, 1.0);
    return static_cast<unsigned char>(std::lround(v * 255.0));
}

// --- PNG via libpng, reading from / writing to memory buffers ---

struct PngReadCursor {
    const unsigned char* data;
    std::size_t size;
    std::size_t pos;
};

void png_mem_read(png_structp png, png_bytep out, png_size_t len) {
    auto* cur = static_cast<PngReadCursor*>(png_get_io_ptr(png));
    if (cur->pos + len > cur->size) png_error(png, "read past end of buffer");
    std::memcpy(out, cur->data + cur->pos, len);
    cur->pos += len;
}

void png_mem_write(png_structp png, png_bytep data, png_size_t len) {
    auto* sink = static_cast<std::vector<unsigned char>*>(png_get_io_ptr(png));
    sink->insert(sink->end(), data, data + len);
}

void png_mem_flush(png_structp) {}

LoadedImage load_png(const std::vector<unsigned char>& bytes, const std::string& path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw io_error(path + ": libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw io_error(path + ": libpng init failed");
    }
    std::vector<png_bytep> rows;
    std::vector<unsigned char> pixels;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw io_error(path + ": malformed PNG");
    }
    PngReadCursor cur{bytes.data(), bytes.size(), 0};
    png_set_read_fn(png, &cur, png_mem_read);
    png_read_info(png, info);

    const png_byte depth = png_get_bit_depth(png, info);
    const png_byte color = png_get_color_type(png, info);
    if (depth == 16) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw io_error(path + ": 16-bit PNG is not supported");
    }
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    const int ch = static_cast<int>(png_get_channels(png, info));
    if (ch != 1 && ch != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw io_error(path + ": unsupported PNG channel layout");
    }
    pixels.resize(static_cast<std::size_t>(w) * h * ch);
    rows.resize(h);
    for (int y = 0; y < h; ++y) rows[y] = pixels.data() + static_cast<std::size_t>(y) * w * ch;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    if (ch == 1) {
        GrayImage img(w, h);
        for (std::size_t i = 0; i < img.pixels(); ++i) img.values[i] = pixels[i] / 255.0;
        return img;
    }
    RgbImage img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t p = (static_cast<std::size_t>(y) * w + x) * 3;
            img.at(0, x, y) = pixels[p] / 255.0;
            img.at(1, x, y) = pixels[p + 1] / 255.0;
            img.at(2, x, y) = pixels[p + 2] / 255.0;
        }
    return img;
}

void save_png(const std::vector<unsigned char>& pixels, int w, int h, int ch,
              const std::string& path) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw io_error(path + ": libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw io_error(path + ": libpng init failed");
    }
    std::vector<unsigned char> sink;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw io_error(path + ": PNG encode failed");
    }
    png_set_write_fn(png, &sink, png_mem_write, png_mem_flush);
    png_set_IHDR(png, info, w, h, 8,
                 ch == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y)
        rows[y] = const_cast<png_bytep>(pixels.data() + static_cast<std::size_t>(y) * w * ch);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    write_file_atomic(path, sink.data(), sink.size());
}

bool has_suffix(const std::string& s, const char* suffix) {
    const std::size_t n = std::strlen(suffix);
    return s.size() >= n && s.compare(s.size() - n, n, suffix) == 0;
}

const unsigned char png_magic[4] = {0x89, 'P', 'N', 'G'};

} // namespace

LoadedImage load_image(const std::string& path) {
    const std::vector<unsigned char> bytes = read_file(path);
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), png_magic, 4) == 0)
        return load_png(bytes, path);
    const PnmHeader h = parse_pnm_header(bytes, path);
    const std::size_t np = static_cast<std::size_t>(h.width) * h.height;
    if (h.kind == '6') {
        if (h.maxval > 255) throw io_error(path + ": 16-bit PPM is not supported");
        if (bytes.size() - h.data_offset < np * 3) throw io_error(path + ": truncated pixel data");
        RgbImage img(h.width, h.height);
        const unsigned char* p = bytes.data() + h.data_offset;
        for (int y = 0; y < h.height; ++y)
            for (int x = 0; x < h.width; ++x) {
                img.at(0, x, y) = *p++ / double(h.maxval);
                img.at(1, x, y) = *p++ / double(h.maxval);
                img.at(2, x, y) = *p++ / double(h.maxval);
            }
        return img;
    }
    GrayImage img(h.width, h.height);
    if (h.maxval > 255) {
        if (bytes.size() - h.data_offset < np * 2) throw io_error(path + ": truncated pixel data");
        const unsigned char* p = bytes.data() + h.data_offset;
        for (std::size_t i = 0; i < np; ++i) {
            const unsigned v = (unsigned(p[0]) << 8) | p[1];
            p += 2;
            img.values[i] = v / double(h.maxval);
        }
    } else {
        if (bytes.size() - h.data_offset < np) throw io_error(path + ": truncated pixel data");
        const unsigned char* p = bytes.data() + h.data_offset;
        for (std::size_t i = 0; i < np; ++i) img.values[i] = p[i] / double(h.maxval);
    }
    return img;
}

void save_image(const RgbImage& img, const std::string& path) {
    if (img.width <= 0 || img.height <= 0) throw shape_error("save_image: empty image");
    std::vector<unsigned char> pixels(img.pixels() * 3);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const std::size_t p = (static_cast<std::size_t>(y) * img.width + x) * 3;
            pixels[p] = quantize8(img.at(0, x, y));
            pixels[p + 1] = quantize8(img.at(1, x, y));
            pixels[p + 2] = quantize8(img.at(2, x, y));
        }
    if (has_suffix(path, ".png")) {
        save_png(pixels, img.width, img.height, 3, path);
        return;
    }
    if (!has_suffix(path, ".ppm"))
        throw io_error("save_image: color images go to .ppm or .png, got " + path);
    std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());
    write_file_atomic(path, out.data(), out.size());
}

void save_image(const GrayImage& img, const std::string& path) {
    if (img.width <= 0 || img.height <= 0) throw shape_error("save_image: empty image");
    std::vector<unsigned char> pixels(img.pixels());
    for (std::size_t i = 0; i < img.pixels(); ++i) pixels[i] = quantize8(img.values[i]);
    if (has_suffix(path, ".png")) {
        save_png(pixels, img.width, img.height, 1, path);
        return;
    }
    if (!has_suffix(path, ".pgm"))
        throw io_error("save_image: gray images go to .pgm or .png, got " + path);
    std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());
    write_file_atomic(path, out.data(), out.size());
}

Pgm16 load_pgm16(const std::string& path) {
    const std::vector<unsigned char> bytes = read_file(path);
    const PnmHeader h = parse_pnm_header(bytes, path);
    if (h.kind != '5') throw io_error(path + ": expected a PGM label map");
    Pgm16 img;
    img.width = h.width;
    img.height = h.height;
    const std::size_t np = static_cast<std::size_t>(h.width) * h.height;
    img.samples.resize(np);
    const unsigned char* p = bytes.data() + h.data_offset;
    if (h.maxval > 255) {
        if (bytes.size() - h.data_offset < np * 2) throw io_error(path + ": truncated pixel data");
        for (std::size_t i = 0; i < np; ++i) {
            img.samples[i] = static_cast<std::uint16_t>((unsigned(p[0]) << 8) | p[1]);
            p += 2;
        }
    } else {
        if (bytes.size() - h.data_offset < np) throw io_error(path + ": truncated pixel data");
        for (std::size_t i = 0; i < np; ++i) img.samples[i] = p[i];
    }
    return img;
}

void save_pgm16(const Pgm16& img, const std::string& path) {
    if (img.width <= 0 || img.height <= 0 ||
        img.samples.size() != static_cast<std::size_t>(img.width) * img.height)
        throw shape_error("save_pgm16: inconsistent dimensions");
    std::string out =
        "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n65535\n";
    out.reserve(out.size() + img.samples.size() * 2);
    for (std::uint16_t v : img.samples) {
        out.push_back(static_cast<char>(v >> 8));
        out.push_back(static_cast<char>(v & 0xff));
    }
    write_file_atomic(path, out.data(), out.size());
}

} // namespace esseg
