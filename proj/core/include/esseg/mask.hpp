#ifndef ESSEG_MASK_HPP
#define ESSEG_MASK_HPP

#include <cstddef>
#include <vector>

namespace esseg {

// A per-pixel yes/no map, row-major. char instead of bool keeps element
// access addressable.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<char> values;

    BinaryMask() = default;
    BinaryMask(int w, int h, bool fill = false)
        : width(w), height(h),
          values(std::size_t(w) * std::size_t(h), fill ? 1 : 0) {}

    bool at(int x, int y) const { return values[std::size_t(y) * width + x] != 0; }
    void set(int x, int y, bool v) { values[std::size_t(y) * width + x] = v ? 1 : 0; }
    std::size_t pixels() const { return std::size_t(width) * std::size_t(height); }
};

} // namespace esseg

#endif
