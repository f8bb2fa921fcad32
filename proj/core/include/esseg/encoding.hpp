#ifndef ESSEG_ENCODING_HPP
#define ESSEG_ENCODING_HPP

#include <vector>

#include "esseg/image.hpp"
#include "esseg/rng.hpp"
#include "esseg/tensor.hpp"

namespace esseg {

// Input blur width from the image-size-relative blur factor:
// sigma = 2*floor(b*w*h/2) + 1. Always odd and at least 1.
int blur_sigma(double blur_factor, int width, int height);

// Decoder input: per-channel uniform [-1,1) noise at the decoder's base
// resolution, Gaussian-blurred with the given sigma. Channels are drawn in
// index order, pixels row-major.
Tensor make_decoder_input(int channels, int width, int height, double sigma, Rng& rng);

// Sinusoidal position channels. Per axis (x then y) and per frequency
// 2^1..2^levels there is a random phase offset in [0, 2pi) and a quadruple
// of channels (sin, -sin, cos, -cos), each mapped through v/2 + 1/2 so the
// range is [0,1]. Normalized coordinates run over [0,1] with denominator
// (size-1); a 1-wide axis sits at coordinate 0.
struct PositionalEncoding {
    int levels = 0;
    std::vector<double> offsets; // x-axis frequencies first, then y-axis
    Tensor maps;                 // 8*levels channels
};
PositionalEncoding make_positional_encoding(int levels, int width, int height, Rng& rng);

// Regression target: R, G, B, then each encoding channel multiplied by the
// lightness map. Channel count is 3 + 8*levels; the first range drives the
// color reconstruction loss, the rest the spatial loss.
struct FitTarget {
    Tensor values;
    int color_begin = 0;
    int color_end = 3;
    int spatial_begin = 3;
    int spatial_end = 3;
};
FitTarget make_fit_target(const RgbImage& img, const GrayImage& lightness,
                          const PositionalEncoding& enc);

} // namespace esseg

#endif
