#ifndef ESSEG_IMAGE_HPP
#define ESSEG_IMAGE_HPP

#include <cstddef>
#include <vector>

#include "esseg/tensor.hpp"

namespace esseg {

// Single-channel real image, row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0)
        : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

    double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
    std::size_t pixels() const { return values.size(); }

    Tensor to_tensor() const;
};

// Three-channel real image in [0,1], planar (channel, y, x) like Tensor.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    RgbImage() = default;
    RgbImage(int w, int h, double fill = 0.0)
        : width(w), height(h), values(3 * static_cast<std::size_t>(w) * h, fill) {}

    double& at(int c, int x, int y) {
        return values[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    double at(int c, int x, int y) const {
        return values[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    std::size_t pixels() const { return static_cast<std::size_t>(width) * height; }

    Tensor to_tensor() const;
    static RgbImage from_tensor(const Tensor& t);

    // All three channels equal to the given intensity image.
    static RgbImage replicate(const GrayImage& g);
};

} // namespace esseg

#endif
