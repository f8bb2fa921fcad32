#ifndef ESSEG_COLOR_HPP
#define ESSEG_COLOR_HPP

#include "esseg/image.hpp"

namespace esseg {

// CIELAB lightness of an sRGB image, rescaled to [0,1] (L* divided by 100).
// Pipeline: sRGB transfer curve to linear light, luminance under D65, then
// the L* cube-root law. White maps to 1, black to 0.
GrayImage rgb_to_lightness(const RgbImage& img);

double srgb_to_linear(double v);
double lightness_of_linear_luminance(double y);

} // namespace esseg

#endif
