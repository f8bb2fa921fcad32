#include "esseg/connectivity.hpp"

#include <cstddef>

namespace esseg {

namespace {

// Shared scanline flood fill; `same` decides whether two pixels belong
// together, subject to both being fillable.
template <typename Eq>
int flood_all(int width, int height, const Eq& same, const std::vector<char>& fillable,
              std::vector<int>& component) {
    const std::size_t n = static_cast<std::size_t>(width) * height;
    component.assign(n, -1);
    std::vector<int> stack;
    int count = 0;
    for (std::size_t start = 0; start < n; ++start) {
        if (!fillable[start] || component[start] >= 0) continue;
        component[start] = count;
        stack.push_back(static_cast<int>(start));
        while (!stack.empty()) {
            const int p = stack.back();
            stack.pop_back();
            const int x = p % width, y = p / width;
            const int nb[4] = {x > 0 ? p - 1 : -1, x + 1 < width ? p + 1 : -1,
                               y > 0 ? p - width : -1, y + 1 < height ? p + width : -1};
            for (int q : nb) {
                if (q < 0 || !fillable[q] || component[q] >= 0 || !same(p, q)) continue;
                component[q] = count;
                stack.push_back(q);
            }
        }
        ++count;
    }
    return count;
}

} // namespace

int count_true_components(const std::vector<char>& mask, int width, int height) {
    std::vector<int> component;
    return flood_all(width, height, [](int, int) { return true; }, mask, component);
}

int component_map(const std::vector<int>& values, int width, int height,
                  std::vector<int>& component) {
    const std::vector<char> all(static_cast<std::size_t>(width) * height, 1);
    return flood_all(width, height,
                     [&values](int a, int b) { return values[a] == values[b]; }, all,
                     component);
}

} // namespace esseg
