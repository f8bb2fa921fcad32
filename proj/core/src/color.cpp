#include "esseg/color.hpp"

#include <cmath>

namespace esseg {

double srgb_to_linear(double v) {
    return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

// L* = 116 f(Y/Yn) - 16 with the CIE cube-root/linear split; Yn = 1 here
// because sRGB luminance of white is 1 by construction.
double lightness_of_linear_luminance(double y) {
    const double t = y;
    const double cut = 216.0 / 24389.0;             // (6/29)^3
    const double f = t > cut ? std::cbrt(t) : (24389.0 / 27.0 * t + 16.0) / 116.0;
    return 116.0 * f - 16.0;
}

GrayImage rgb_to_lightness(const RgbImage& img) {
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const double r = srgb_to_linear(img.at(0, x, y));
            const double g = srgb_to_linear(img.at(1, x, y));
            const double b = srgb_to_linear(img.at(2, x, y));
            const double lum = 0.2126 * r + 0.7152 * g + 0.0722 * b;
            out.at(x, y) = lightness_of_linear_luminance(lum) / 100.0;
        }
    return out;
}

} // namespace esseg
