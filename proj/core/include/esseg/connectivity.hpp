#ifndef ESSEG_CONNECTIVITY_HPP
#define ESSEG_CONNECTIVITY_HPP

#include <vector>

namespace esseg {

// Number of 4-connected components of the true pixels of a w x h mask.
int count_true_components(const std::vector<char>& mask, int width, int height);

// 4-connected components of equal values over a w x h integer map. Fills
// `component` with ids in [0, count) assigned in row-major discovery order
// and returns the count.
int component_map(const std::vector<int>& values, int width, int height,
                  std::vector<int>& component);

} // namespace esseg

#endif
