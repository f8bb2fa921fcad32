#ifndef ESSEG_FOREGROUND_HPP
#define ESSEG_FOREGROUND_HPP

#include <vector>

#include "esseg/decoder.hpp"
#include "esseg/image.hpp"
#include "esseg/labeling.hpp"
#include "esseg/mask.hpp"

namespace esseg {

// Relative contrast of each superpixel against its surroundings:
//   w_i = (mean(i) - mean(neighborhood)) / mean(neighborhood)
// where the neighborhood is the union of the pixels of every superpixel
// 4-adjacent to i. The ratio form makes every coefficient invariant under
// global intensity scaling. A neighborhood mean <= 1e-6 (flat or black
// surroundings) yields coefficient 0 and a warning on the error stream.
struct WeberMap {
    GrayImage map;                    // per-pixel: the coefficient of its superpixel
    std::vector<double> coefficients; // one per label
};
WeberMap weber_map(const GrayImage& slice, const Labeling& sp);

// Minimum-cross-entropy threshold, iterated to a fixed point:
//   t <- (mu_below - mu_above) / (ln mu_below - ln mu_above)
// over values shifted strictly positive (shift = -min + 1e-6*range),
// starting from the mean, until |dt| < 1e-7*range or 100 iterations; the
// returned threshold is shifted back. The update is the logarithmic mean of
// the two group means, so it stays strictly between them and both groups
// stay nonempty. Throws numeric_error when all values are equal (no
// threshold exists).
double li_threshold(const std::vector<double>& values);

// Which value collection the threshold is computed over: one coefficient
// per superpixel, or the per-pixel map (identical values, but larger
// superpixels then weigh more). Either way the mask is a union of whole
// superpixels.
enum class ThresholdDomain { per_superpixel, per_pixel };

struct SegmentOptions {
    ThresholdDomain domain = ThresholdDomain::per_superpixel;
    int clusters = 200;
    int threads = 1;
};

struct SliceSegmentation {
    BinaryMask mask; // superpixels whose coefficient exceeds the threshold
    Labeling superpixels;
    WeberMap weber;
    double threshold = 0.0;
};

// Foreground estimation for one grayscale slice: fit the decoder ensemble,
// cluster the embeddings into opts.clusters superpixels, compute the Weber
// map, threshold it with li_threshold. Deterministic given cfg.seed.
SliceSegmentation segment_slice(const GrayImage& slice, const DecoderConfig& cfg,
                                const SegmentOptions& opts = {});

} // namespace esseg

#endif
