#ifndef ESSEG_CLUSTERING_HPP
#define ESSEG_CLUSTERING_HPP

#include <vector>

#include "esseg/decoder.hpp"
#include "esseg/labeling.hpp"
#include "esseg/rng.hpp"

namespace esseg {

// Seed-grid dimensions derived from a requested cluster count:
// n_w = floor(sqrt(requested * w / h)), n_h = floor(requested / n_w), so
// grid cells are roughly square and the realized count n_w * n_h may
// undershoot the request (100 on 481x321 gives 12x8 = 96 seeds).
struct GridShape {
    int n_w = 0;
    int n_h = 0;
    int count() const { return n_w * n_h; }
};

// Throws param_error when either grid dimension comes out zero (the request
// is too small for the aspect ratio).
GridShape grid_seed_count(int requested, int width, int height);

struct Seed {
    int x = 0;
    int y = 0;
};

// One seed per grid cell, at the floored cell center.
std::vector<Seed> grid_seeds(GridShape shape, int width, int height);

// Moves each seed to the position of smallest mean gradient magnitude of the
// embedding within its 5x5 window (clipped at borders). The window scan is
// row-major and keeps the first minimum, so a fully tied window lands on its
// top-left corner.
void perturb_seeds(std::vector<Seed>& seeds, const EmbeddingMap& embedding);

struct ClusterOptions {
    // A pixel considers clusters whose spatial centroid lies within this
    // multiple of the grid step S = sqrt(w*h / seeds), Chebyshev distance.
    // <= 0 removes the restriction (every cluster is a candidate).
    double centroid_window = 2.0;
    int max_iterations = 100;
    // Stop once the fraction of pixels whose label changed over one full
    // iteration drops below this.
    double convergence_fraction = 0.001;
    int threads = 1;
};

// Superpixels by k-means over the embedding vectors alone: spatial structure
// enters only through the seed grid and the centroid search window, not the
// distance. Each iteration assigns pixels to the nearest cluster center by
// Euclidean distance (ties: nearer spatial centroid, then smaller label;
// pixels with no candidate in the window fall back to the spatially nearest
// centroid), recomputes means, then repairs connectivity by absorbing every
// non-largest fragment of each label into a uniformly random 4-adjacent
// label. Empty labels are dropped and the rest renumbered ascending at the
// end, so the result is a total partition of 4-connected superpixels with
// num_labels <= seed count. Deterministic for a given rng seed at any thread
// count.
Labeling cluster(const EmbeddingMap& embedding, int requested, Rng& rng,
                 const ClusterOptions& opts = {});

// Stream driving the random fragment reassignment for a pipeline run.
// Offset from the raw seed so it never coincides with a decoder member
// stream derived from the same seed.
inline Rng cluster_rng(std::uint64_t seed) { return Rng(seed ^ 0x736c6963UL); }

// The connectivity repair alone: per label ascending, keep the largest
// 4-connected component (ties: the one appearing first in row-major order)
// and paint each remaining fragment wholesale onto one of its 4-adjacent
// labels, chosen uniformly among the distinct neighbors. A single pass
// leaves every label 4-connected. Labels are not renumbered, so an input
// whose labels are already connected comes back unchanged.
Labeling enforce_connectivity(const Labeling& labeling, Rng& rng);

} // namespace esseg

#endif
