#include "esseg/tensor.hpp"

#include <cmath>
#include <string>

#include "esseg/errors.hpp"

namespace esseg {

Tensor::Tensor(int c, int w, int h, double fill)
    : channels(c), width(w), height(h) {
    require_valid_shape(c, w, h, "Tensor");
    data.assign(static_cast<std::size_t>(c) * w * h, fill);
}

bool Tensor::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

void require_valid_shape(int c, int w, int h, const char* who) {
    if (c <= 0 || w <= 0 || h <= 0)
        throw shape_error(std::string(who) + ": invalid shape " + std::to_string(c) + "x" +
                          std::to_string(w) + "x" + std::to_string(h));
}

} // namespace esseg
