#ifndef ESSEG_TENSOR_HPP
#define ESSEG_TENSOR_HPP

#include <cstddef>
#include <vector>

namespace esseg {

// Dense multi-channel 2-D array. Layout is (channel, y, x) row-major, so one
// channel plane is contiguous and rows inside a plane are contiguous.
struct Tensor {
    int channels = 0;
    int width = 0;
    int height = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int c, int w, int h, double fill = 0.0);

    double& at(int c, int y, int x) { return data[plane(c) + static_cast<std::size_t>(y) * width + x]; }
    double at(int c, int y, int x) const { return data[plane(c) + static_cast<std::size_t>(y) * width + x]; }

    double* channel(int c) { return data.data() + plane(c); }
    const double* channel(int c) const { return data.data() + plane(c); }

    std::size_t plane(int c) const { return static_cast<std::size_t>(c) * pixels(); }
    std::size_t pixels() const { return static_cast<std::size_t>(width) * height; }
    std::size_t size() const { return data.size(); }

    bool same_shape(const Tensor& o) const {
        return channels == o.channels && width == o.width && height == o.height;
    }
    bool all_finite() const;
};

// Throws shape_error unless c/w/h are all positive.
void require_valid_shape(int c, int w, int h, const char* who);

} // namespace esseg

#endif
