#ifndef ESSEG_IMAGE_IO_HPP
#define ESSEG_IMAGE_IO_HPP

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "esseg/image.hpp"

namespace esseg {

using LoadedImage = std::variant<RgbImage, GrayImage>;

// Reads PPM (P6), PGM (P5) or PNG, sniffing the format from the file content.
// 8-bit samples are normalized by 255, 16-bit PGM by 65535. Color files load
// as RgbImage, grayscale as GrayImage. Malformed files raise io_error.
LoadedImage load_image(const std::string& path);

// Writes by extension: .ppm, .pgm, or .png. Values are clamped to [0,1] and
// quantized to 8 bits, so an 8-bit load/save round trip is lossless.
void save_image(const RgbImage& img, const std::string& path);
void save_image(const GrayImage& img, const std::string& path);

// Writes the whole buffer to a sibling temporary file and renames it into
// place, so a failed run never leaves a truncated output behind. Every file
// writer in the project goes through this.
void write_file_atomic(const std::string& path, const void* data, std::size_t len);
void write_file_atomic(const std::string& path, const std::string& text);

// Raw 16-bit PGM (big-endian sample order, per the format). Used for label
// maps, where values are identifiers rather than intensities.
struct Pgm16 {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> samples;
};
Pgm16 load_pgm16(const std::string& path);
void save_pgm16(const Pgm16& img, const std::string& path);

} // namespace esseg

#endif
