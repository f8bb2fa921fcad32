#ifndef ESSEG_FILTERS_HPP
#define ESSEG_FILTERS_HPP

#include "esseg/image.hpp"
#include "esseg/tensor.hpp"

namespace esseg {

// Separable Gaussian blur applied per channel. The kernel is truncated at
// radius ceil(3*sigma) and renormalized to sum 1; borders use symmetric
// reflection (…,1,0 | 0,1,…), which stays valid for radii beyond the image
// size. Constant inputs pass through unchanged and channel sums are
// preserved up to rounding.
Tensor gaussian_blur(const Tensor& input, double sigma);
GrayImage gaussian_blur(const GrayImage& input, double sigma);

// Per-pixel gradient magnitude averaged over channels. Central differences
// inside, one-sided at the borders; both axes need at least 2 samples.
GrayImage mean_gradient_magnitude(const Tensor& input);

} // namespace esseg

#endif
