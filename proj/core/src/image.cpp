#include "esseg/image.hpp"

#include <algorithm>

#include "esseg/errors.hpp"

namespace esseg {

Tensor GrayImage::to_tensor() const {
    Tensor t(1, width, height);
    t.data = values;
    return t;
}

Tensor RgbImage::to_tensor() const {
    Tensor t(3, width, height);
    t.data = values;
    return t;
}

RgbImage RgbImage::from_tensor(const Tensor& t) {
    if (t.channels != 3) throw shape_error("RgbImage::from_tensor: need 3 channels");
    RgbImage img(t.width, t.height);
    img.values = t.data;
    return img;
}

RgbImage RgbImage::replicate(const GrayImage& g) {
    RgbImage img(g.width, g.height);
    for (int c = 0; c < 3; ++c)
        std::copy(g.values.begin(), g.values.end(),
                  img.values.begin() + static_cast<std::size_t>(c) * g.pixels());
    return img;
}

} // namespace esseg
