#ifndef ESSEG_DECODER_HPP
#define ESSEG_DECODER_HPP

#include <cstdint>
#include <vector>

#include "esseg/autodiff.hpp"
#include "esseg/encoding.hpp"
#include "esseg/image.hpp"
#include "esseg/rng.hpp"
#include "esseg/tensor.hpp"

namespace esseg {

// Hyperparameters of one decoder run. `lambda` weights the spatial term of
// the loss; `blur_factor` sets the input blur width relative to image area;
// at step `lr_decay_step` dropout turns off and the learning rate is
// multiplied by `lr_decay_factor`.
struct DecoderConfig {
    int channels = 128;        // hidden width k
    int blocks = 5;            // upsampling blocks B
    int levels = 1;            // positional-encoding frequency count
    double lambda = 0.1;
    double blur_factor = 0.0001;
    double dropout_p = 0.3;
    double lr = 0.01;
    int steps = 1500;
    int lr_decay_step = 1000;
    double lr_decay_factor = 0.8;
    int ensemble = 3;          // independently fitted decoders
    std::uint64_t seed = 0;

    int output_channels() const { return 3 + 8 * levels; }
};

// Defaults for photographs and for small/microscopy images. The downsized
// preset narrows the decoder, drops one block, doubles the blur factor and
// grows the ensemble.
DecoderConfig natural_preset();
DecoderConfig downsized_preset();

// Throws param_error on any out-of-range field.
void validate(const DecoderConfig& cfg);

struct StageSize {
    int width = 0;
    int height = 0;
};

// Per-stage spatial sizes, smallest first: sizes[blocks] is (w, h) and each
// earlier stage is the ceiling half of the next, so upsampling lands exactly
// on (w, h) with no final resize. Throws param_error when halving would push
// an axis below 2; the message suggests fewer blocks.
std::vector<StageSize> stage_sizes(int width, int height, int blocks);

struct DecoderParams {
    struct Block {
        Tensor mix;   // (k, k, 1) channel-mixing matrix
        Tensor gain;  // (k, 1, 1) norm scale
        Tensor shift; // (k, 1, 1) norm offset
    };
    std::vector<Block> blocks;
    Tensor head;      // (3+8*levels, k, 1) readout matrix
};

// Mixing and head entries are i.i.d. normal with std 1/sqrt(fan-in); gains
// start at 1 and shifts at 0.
DecoderParams init_decoder_params(const DecoderConfig& cfg, Rng& rng);

// One forward construction through the autodiff graph. Keeps the node ids
// needed to read gradients back out for the optimizer.
struct ForwardPass {
    Graph graph;
    std::vector<int> mix_ids, gain_ids, shift_ids;
    int head_id = -1;
    int reconstruction = -1; // after sigmoid, (3+8*levels) channels
    int last_hidden = -1;    // final block after channel_norm, before dropout
    int last_relu = -1;      // final block's relu output; its positive support
                             // is the unit activation pattern
};

// Per block: linear mix -> bilinear upsample to the next stage size -> relu
// -> channel_norm -> channel_dropout; then the head matrix and a sigmoid.
// Input spatial size must equal sizes.front().
ForwardPass decoder_forward(const DecoderParams& params, const Tensor& input,
                            const std::vector<StageSize>& sizes, double dropout_p,
                            bool dropout_enabled, Rng& rng);

struct LossPoint {
    int step = 0;
    double total = 0.0;
    double color = 0.0;
    double spatial = 0.0;
};

struct FitResult {
    DecoderParams params;
    Tensor last_hidden;             // with dropout disabled, final parameters
    Tensor last_relu;               // same forward pass, before normalization
    std::vector<LossPoint> history; // one entry per optimization step
    int sigma = 0;                  // input blur width actually used
};

// An image prepared for fitting: RGB channels for the color loss and a
// lightness map that modulates the positional-encoding targets. Color input
// uses CIELAB lightness; grayscale input replicates to three channels and
// uses the raw intensity as lightness.
struct FitImage {
    RgbImage rgb;
    GrayImage lightness;

    static FitImage from_rgb(const RgbImage& img);
    static FitImage from_gray(const GrayImage& img);
};

// Fit one decoder to the image. Deterministic given (cfg.seed, member_index):
// that stream drives, in order, the input noise, the encoding offsets, the
// weight init, and the per-step dropout masks. sigma_override > 0 replaces
// the blur width derived from cfg.blur_factor (diagnostics only).
FitResult fit(const FitImage& img, const DecoderConfig& cfg, int member_index,
              double sigma_override = 0.0);
FitResult fit(const RgbImage& img, const DecoderConfig& cfg, int member_index);

// Per-pixel feature vectors: the last-hidden maps of cfg.ensemble
// independently fitted decoders, concatenated channel-wise in member order.
// Members may run on up to `threads` threads; results do not depend on the
// thread count.
struct EmbeddingMap {
    int dims = 0;
    int width = 0;
    int height = 0;
    Tensor features; // dims channels of width x height
};
EmbeddingMap extract_embeddings(const FitImage& img, const DecoderConfig& cfg,
                                int threads = 1);

// Average over channels of the number of 4-connected components of the
// strictly-positive support of each channel.
double count_activated_regions(const Tensor& activations);

// Expected supra-threshold region count for a unit-variance smooth field of
// side N and smoothing width sigma at threshold z:
// N^2/(2*sigma^2) * (2*pi)^(-3/2) * z * exp(-z^2/2).
double expected_region_count(int side, double sigma, double z);

} // namespace esseg

#endif
