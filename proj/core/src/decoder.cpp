#include "esseg/decoder.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "esseg/adam.hpp"
#include "esseg/color.hpp"
#include "esseg/connectivity.hpp"
#include "esseg/errors.hpp"

namespace esseg {

DecoderConfig natural_preset() { return DecoderConfig{}; }

DecoderConfig downsized_preset() {
    DecoderConfig cfg;
    cfg.channels = 32;
    cfg.blocks = 4;
    cfg.ensemble = 5;
    cfg.blur_factor = 0.0002;
    return cfg;
}

void validate(const DecoderConfig& cfg) {
    auto bad = [](const std::string& msg) { throw param_error("DecoderConfig: " + msg); };
    if (cfg.channels < 1) bad("channels must be >= 1");
    if (cfg.blocks < 1) bad("blocks must be >= 1");
    if (cfg.levels < 1) bad("levels must be >= 1");
    if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0)) bad("lambda must be in [0,1]");
    if (!(cfg.blur_factor > 0.0)) bad("blur_factor must be positive");
    if (!(cfg.dropout_p >= 0.0 && cfg.dropout_p < 1.0)) bad("dropout must be in [0,1)");
    if (!(cfg.lr > 0.0)) bad("lr must be positive");
    if (cfg.steps < 0) bad("steps must be >= 0");
    if (cfg.lr_decay_step < 0 || cfg.lr_decay_step > cfg.steps)
        bad("need steps >= lr_decay_step >= 0");
    if (!(cfg.lr_decay_factor > 0.0)) bad("lr_decay_factor must be positive");
    if (cfg.ensemble < 1) bad("ensemble size must be >= 1");
}

std::vector<StageSize> stage_sizes(int width, int height, int blocks) {
    if (blocks < 1) throw param_error("stage_sizes: blocks must be >= 1");
    if (width < 2 || height < 2) throw param_error("stage_sizes: image must be at least 2x2");
    std::vector<StageSize> sizes(static_cast<std::size_t>(blocks) + 1);
    sizes[blocks] = {width, height};
    for (int i = blocks; i > 0; --i) {
        const int w = (sizes[i].width + 1) / 2;
        const int h = (sizes[i].height + 1) / 2;
        if (w < 2 || h < 2)
            throw param_error("stage_sizes: " + std::to_string(width) + "x" +
                              std::to_string(height) + " cannot be halved " +
                              std::to_string(blocks) + " times; use fewer blocks");
        sizes[i - 1] = {w, h};
    }
    return sizes;
}

DecoderParams init_decoder_params(const DecoderConfig& cfg, Rng& rng) {
    const int k = cfg.channels;
    const double std_in = 1.0 / std::sqrt(double(k));
    DecoderParams params;
    params.blocks.resize(cfg.blocks);
    for (auto& blk : params.blocks) {
        blk.mix = Tensor(k, k, 1);
        for (double& v : blk.mix.data) v = std_in * rng.normal();
        blk.gain = Tensor(k, 1, 1, 1.0);
        blk.shift = Tensor(k, 1, 1, 0.0);
    }
    params.head = Tensor(cfg.output_channels(), k, 1);
    for (double& v : params.head.data) v = std_in * rng.normal();
    return params;
}

ForwardPass decoder_forward(const DecoderParams& params, const Tensor& input,
                            const std::vector<StageSize>& sizes, double dropout_p,
                            bool dropout_enabled, Rng& rng) {
    if (sizes.size() != params.blocks.size() + 1)
        throw shape_error("decoder_forward: stage count does not match block count");
    if (input.width != sizes[0].width || input.height != sizes[0].height)
        throw shape_error("decoder_forward: input must be " + std::to_string(sizes[0].width) +
                          "x" + std::to_string(sizes[0].height));
    ForwardPass fp;
    Graph& g = fp.graph;
    int x = g.leaf(input);
    for (std::size_t i = 0; i < params.blocks.size(); ++i) {
        const auto& blk = params.blocks[i];
        const int mix = g.leaf(blk.mix);
        const int gain = g.leaf(blk.gain);
        const int shift = g.leaf(blk.shift);
        fp.mix_ids.push_back(mix);
        fp.gain_ids.push_back(gain);
        fp.shift_ids.push_back(shift);
        x = g.linear(x, mix);
        x = g.bilinear_upsample(x, sizes[i + 1].width, sizes[i + 1].height);
        x = g.relu(x);
        if (i + 1 == params.blocks.size()) fp.last_relu = x;
        x = g.channel_norm(x, gain, shift);
        if (i + 1 == params.blocks.size()) fp.last_hidden = x;
        x = g.channel_dropout(x, dropout_p, rng, dropout_enabled);
    }
    fp.head_id = g.leaf(params.head);
    x = g.linear(x, fp.head_id);
    fp.reconstruction = g.sigmoid(x);
    return fp;
}

FitImage FitImage::from_rgb(const RgbImage& img) {
    return FitImage{img, rgb_to_lightness(img)};
}

FitImage FitImage::from_gray(const GrayImage& img) {
    return FitImage{RgbImage::replicate(img), img};
}

FitResult fit(const FitImage& img, const DecoderConfig& cfg, int member_index,
              double sigma_override) {
    validate(cfg);
    const int w = img.rgb.width, h = img.rgb.height;
    if (w != img.lightness.width || h != img.lightness.height)
        throw shape_error("fit: rgb and lightness sizes differ");
    const std::vector<StageSize> sizes = stage_sizes(w, h, cfg.blocks);

    Rng rng = member_rng(cfg.seed, member_index);
    FitResult result;
    result.sigma = blur_sigma(cfg.blur_factor, w, h);
    const double sigma = sigma_override > 0.0 ? sigma_override : double(result.sigma);
    if (sigma_override > 0.0) result.sigma = static_cast<int>(std::lround(sigma_override));

    const Tensor input =
        make_decoder_input(cfg.channels, sizes[0].width, sizes[0].height, sigma, rng);
    const PositionalEncoding enc = make_positional_encoding(cfg.levels, w, h, rng);
    const FitTarget target = make_fit_target(img.rgb, img.lightness, enc);

    result.params = init_decoder_params(cfg, rng);
    AdamState adam;
    adam.lr = cfg.lr;
    result.history.reserve(cfg.steps);

    for (int step = 0; step < cfg.steps; ++step) {
        if (step == cfg.lr_decay_step) adam.lr *= cfg.lr_decay_factor;
        const bool dropout_on = step < cfg.lr_decay_step;

        ForwardPass fp = decoder_forward(result.params, input, sizes, cfg.dropout_p,
                                         dropout_on, rng);
        Graph& g = fp.graph;
        const int color = g.mse_channels(fp.reconstruction, target.values,
                                         target.color_begin, target.color_end);
        const int spatial = g.mse_channels(fp.reconstruction, target.values,
                                           target.spatial_begin, target.spatial_end);
        const int total = g.weighted_sum(1.0 - cfg.lambda, color, cfg.lambda, spatial);

        LossPoint pt;
        pt.step = step;
        pt.color = g.value(color).data[0];
        pt.spatial = g.value(spatial).data[0];
        pt.total = g.value(total).data[0];
        if (!std::isfinite(pt.total))
            throw numeric_error("fit: loss is not finite at step " + std::to_string(step));
        result.history.push_back(pt);

        g.backward(total);

        std::vector<ParamRef> refs;
        refs.reserve(3 * cfg.blocks + 1);
        for (int b = 0; b < cfg.blocks; ++b) {
            const std::string tag = "block" + std::to_string(b);
            refs.push_back({&result.params.blocks[b].mix, &g.grad(fp.mix_ids[b]), tag + ".mix"});
            refs.push_back({&result.params.blocks[b].gain, &g.grad(fp.gain_ids[b]), tag + ".gain"});
            refs.push_back(
                {&result.params.blocks[b].shift, &g.grad(fp.shift_ids[b]), tag + ".shift"});
        }
        refs.push_back({&result.params.head, &g.grad(fp.head_id), "head"});
        adam_step(adam, refs);
    }

    ForwardPass final_fp =
        decoder_forward(result.params, input, sizes, cfg.dropout_p, false, rng);
    result.last_hidden = final_fp.graph.value(final_fp.last_hidden);
    result.last_relu = final_fp.graph.value(final_fp.last_relu);
    return result;
}

FitResult fit(const RgbImage& img, const DecoderConfig& cfg, int member_index) {
    return fit(FitImage::from_rgb(img), cfg, member_index);
}

EmbeddingMap extract_embeddings(const FitImage& img, const DecoderConfig& cfg, int threads) {
    validate(cfg);
    const int nd = cfg.ensemble;
    std::vector<Tensor> hidden(nd);
    std::vector<std::exception_ptr> errors(nd);

    const int workers = std::clamp(threads, 1, nd);
    if (workers == 1) {
        for (int m = 0; m < nd; ++m) hidden[m] = fit(img, cfg, m).last_hidden;
    } else {
        std::atomic<int> next{0};
        auto run = [&]() {
            for (;;) {
                const int m = next.fetch_add(1);
                if (m >= nd) return;
                try {
                    hidden[m] = fit(img, cfg, m).last_hidden;
                } catch (...) {
                    errors[m] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int t = 0; t < workers; ++t) pool.emplace_back(run);
        for (auto& t : pool) t.join();
        for (int m = 0; m < nd; ++m)
            if (errors[m]) std::rethrow_exception(errors[m]);
    }

    EmbeddingMap map;
    map.width = img.rgb.width;
    map.height = img.rgb.height;
    map.dims = nd * cfg.channels;
    map.features = Tensor(map.dims, map.width, map.height);
    const std::size_t plane = map.features.pixels();
    for (int m = 0; m < nd; ++m) {
        if (hidden[m].channels != cfg.channels)
            throw shape_error("extract_embeddings: unexpected hidden width");
        std::copy(hidden[m].data.begin(), hidden[m].data.end(),
                  map.features.data.begin() + std::size_t(m) * cfg.channels * plane);
    }
    return map;
}

double count_activated_regions(const Tensor& activations) {
    const std::size_t np = activations.pixels();
    std::vector<char> mask(np);
    long long total = 0;
    for (int c = 0; c < activations.channels; ++c) {
        const double* src = activations.channel(c);
        for (std::size_t p = 0; p < np; ++p) mask[p] = src[p] > 0.0 ? 1 : 0;
        total += count_true_components(mask, activations.width, activations.height);
    }
    return double(total) / double(activations.channels);
}

double expected_region_count(int side, double sigma, double z) {
    if (sigma <= 0.0) throw param_error("expected_region_count: sigma must be positive");
    const double n2 = double(side) * double(side);
    const double two_pi = 6.283185307179586476925286766559;
    return n2 / (2.0 * sigma * sigma) * std::pow(two_pi, -1.5) * z * std::exp(-0.5 * z * z);
}

} // namespace esseg
