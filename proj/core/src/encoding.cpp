#include "esseg/encoding.hpp"

#include <cmath>
#include <string>

#include "esseg/errors.hpp"
#include "esseg/filters.hpp"

namespace esseg {

namespace {
constexpr double two_pi = 6.283185307179586476925286766559;
}

int blur_sigma(double blur_factor, int width, int height) {
    if (blur_factor <= 0.0) throw param_error("blur_sigma: blur factor must be positive");
    if (width <= 0 || height <= 0) throw param_error("blur_sigma: non-positive image size");
    const double bwh = blur_factor * double(width) * double(height);
    return 2 * static_cast<int>(std::floor(bwh / 2.0)) + 1;
}

Tensor make_decoder_input(int channels, int width, int height, double sigma, Rng& rng) {
    require_valid_shape(channels, width, height, "make_decoder_input");
    Tensor noise(channels, width, height);
    for (double& v : noise.data) v = rng.uniform(-1.0, 1.0);
    return gaussian_blur(noise, sigma);
}

PositionalEncoding make_positional_encoding(int levels, int width, int height, Rng& rng) {
    if (levels < 1) throw param_error("make_positional_encoding: levels must be >= 1");
    if (width <= 0 || height <= 0)
        throw param_error("make_positional_encoding: non-positive size");
    PositionalEncoding enc;
    enc.levels = levels;
    enc.offsets.resize(2 * static_cast<std::size_t>(levels));
    for (double& o : enc.offsets) o = rng.uniform(0.0, two_pi);
    enc.maps = Tensor(8 * levels, width, height);

    for (int axis = 0; axis < 2; ++axis) {
        const int n = axis == 0 ? width : height;
        for (int f = 0; f < levels; ++f) {
            const double freq = std::pow(2.0, double(f + 1)); // frequencies 2^1 .. 2^levels
            const double phase = enc.offsets[static_cast<std::size_t>(axis) * levels + f];
            const int base = axis * 4 * levels + f * 4;
            for (int y = 0; y < height; ++y)
                for (int x = 0; x < width; ++x) {
                    const int coord = axis == 0 ? x : y;
                    const double z = n > 1 ? double(coord) / double(n - 1) : 0.0;
                    const double arg = freq * 3.14159265358979323846 * z + phase;
                    const double s = std::sin(arg), c = std::cos(arg);
                    enc.maps.at(base + 0, y, x) = 0.5 * s + 0.5;
                    enc.maps.at(base + 1, y, x) = 0.5 * -s + 0.5;
                    enc.maps.at(base + 2, y, x) = 0.5 * c + 0.5;
                    enc.maps.at(base + 3, y, x) = 0.5 * -c + 0.5;
                }
        }
    }
    return enc;
}

FitTarget make_fit_target(const RgbImage& img, const GrayImage& lightness,
                          const PositionalEncoding& enc) {
    if (img.width != lightness.width || img.height != lightness.height ||
        img.width != enc.maps.width || img.height != enc.maps.height)
        throw shape_error("make_fit_target: image, lightness and encoding sizes differ");
    FitTarget t;
    const int spatial = enc.maps.channels;
    t.values = Tensor(3 + spatial, img.width, img.height);
    t.spatial_end = 3 + spatial;
    const std::size_t np = t.values.pixels();
    for (int c = 0; c < 3; ++c) {
        const double* src = img.values.data() + static_cast<std::size_t>(c) * np;
        double* dst = t.values.channel(c);
        for (std::size_t p = 0; p < np; ++p) dst[p] = src[p];
    }
    for (int c = 0; c < spatial; ++c) {
        const double* e = enc.maps.channel(c);
        double* dst = t.values.channel(3 + c);
        for (std::size_t p = 0; p < np; ++p) dst[p] = e[p] * lightness.values[p];
    }
    return t;
}

} // namespace esseg
