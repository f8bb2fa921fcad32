#include "esseg/filters.hpp"

#include <cmath>
#include <vector>

#include "esseg/errors.hpp"

namespace esseg {

namespace {

std::vector<double> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * (double(i) / sigma) * (double(i) / sigma));
        k[i + radius] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

// Symmetric reflection: -1 -> 0, -2 -> 1, n -> n-1. Folds as many times as
// needed, so any radius works on any axis length.
int reflect(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - 1 - i;
}

} // namespace

Tensor gaussian_blur(const Tensor& input, double sigma) {
    if (sigma <= 0.0) throw param_error("gaussian_blur: sigma must be positive");
    const std::vector<double> k = gaussian_kernel(sigma);
    const int radius = static_cast<int>(k.size() / 2);
    Tensor out(input.channels, input.width, input.height);
    std::vector<double> row(input.width), col(input.height);
    for (int c = 0; c < input.channels; ++c) {
        const double* src = input.channel(c);
        double* dst = out.channel(c);
        // horizontal pass into dst
        for (int y = 0; y < input.height; ++y) {
            const double* s = src + std::size_t(y) * input.width;
            double* d = dst + std::size_t(y) * input.width;
            for (int x = 0; x < input.width; ++x) row[x] = s[x];
            for (int x = 0; x < input.width; ++x) {
                double acc = 0.0;
                for (int t = -radius; t <= radius; ++t)
                    acc += k[t + radius] * row[reflect(x + t, input.width)];
                d[x] = acc;
            }
        }
        // vertical pass in place
        for (int x = 0; x < input.width; ++x) {
            for (int y = 0; y < input.height; ++y) col[y] = dst[std::size_t(y) * input.width + x];
            for (int y = 0; y < input.height; ++y) {
                double acc = 0.0;
                for (int t = -radius; t <= radius; ++t)
                    acc += k[t + radius] * col[reflect(y + t, input.height)];
                dst[std::size_t(y) * input.width + x] = acc;
            }
        }
    }
    return out;
}

GrayImage gaussian_blur(const GrayImage& input, double sigma) {
    Tensor t = gaussian_blur(input.to_tensor(), sigma);
    GrayImage out(input.width, input.height);
    out.values = std::move(t.data);
    return out;
}

GrayImage mean_gradient_magnitude(const Tensor& input) {
    if (input.width < 2 || input.height < 2)
        throw shape_error("mean_gradient_magnitude: need at least 2x2");
    GrayImage out(input.width, input.height);
    const int w = input.width, h = input.height;
    for (int c = 0; c < input.channels; ++c) {
        const double* src = input.channel(c);
        for (int y = 0; y < h; ++y) {
            const std::size_t row = std::size_t(y) * w;
            for (int x = 0; x < w; ++x) {
                double dx, dy;
                if (x == 0)
                    dx = src[row + 1] - src[row];
                else if (x == w - 1)
                    dx = src[row + x] - src[row + x - 1];
                else
                    dx = 0.5 * (src[row + x + 1] - src[row + x - 1]);
                if (y == 0)
                    dy = src[row + w + x] - src[row + x];
                else if (y == h - 1)
                    dy = src[row + x] - src[row - w + x];
                else
                    dy = 0.5 * (src[row + w + x] - src[row - w + x]);
                out.at(x, y) += std::sqrt(dx * dx + dy * dy);
            }
        }
    }
    const double inv = 1.0 / input.channels;
    for (double& v : out.values) v *= inv;
    return out;
}

} // namespace esseg
