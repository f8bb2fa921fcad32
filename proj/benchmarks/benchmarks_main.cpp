// Microbenchmarks for the hot paths: blur, one optimization step, embedding
// extraction, clustering, metrics, and the foreground stage.

#include <cstdint>
#include <vector>

#include <benchmark/benchmark.h>

#include "esseg/adam.hpp"
#include "esseg/autodiff.hpp"
#include "esseg/clustering.hpp"
#include "esseg/decoder.hpp"
#include "esseg/encoding.hpp"
#include "esseg/filters.hpp"
#include "esseg/foreground.hpp"
#include "esseg/metrics.hpp"
#include "esseg/rng.hpp"

using namespace esseg;

namespace {

Tensor random_tensor(Rng& rng, int c, int w, int h) {
    Tensor t(c, w, h);
    for (double& v : t.data) v = rng.normal();
    return t;
}

Labeling random_labeling(Rng& rng, int w, int h, int labels) {
    Labeling l(w, h);
    l.num_labels = labels;
    for (int& v : l.labels) v = int(rng.uniform_int(std::uint64_t(labels)));
    return l;
}

// Small but structurally complete fitting setup shared by the decoder
// benchmarks.
struct FitSetup {
    DecoderConfig cfg;
    std::vector<StageSize> sizes;
    Tensor input;
    FitTarget target;
    DecoderParams params;

    FitSetup() {
        cfg.channels = 32;
        cfg.blocks = 3;
        cfg.ensemble = 1;
        Rng rng(1);
        sizes = stage_sizes(32, 32, cfg.blocks);
        input = make_decoder_input(cfg.channels, sizes[0].width, sizes[0].height, 1.0,
                                   rng);
        const PositionalEncoding enc = make_positional_encoding(cfg.levels, 32, 32, rng);
        RgbImage img(32, 32);
        for (double& v : img.values) v = rng.uniform(0.0, 1.0);
        GrayImage light(32, 32);
        for (double& v : light.values) v = rng.uniform(0.0, 1.0);
        target = make_fit_target(img, light, enc);
        params = init_decoder_params(cfg, rng);
    }
};

void BM_GaussianBlur(benchmark::State& state) {
    Rng rng(1);
    const Tensor t = random_tensor(rng, 3, 256, 256);
    const double sigma = double(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(gaussian_blur(t, sigma));
}
BENCHMARK(BM_GaussianBlur)->Arg(2)->Arg(8)->Arg(32);

void BM_ForwardBackward(benchmark::State& state) {
    const FitSetup s;
    Rng dropout_rng(2);
    for (auto _ : state) {
        ForwardPass fp = decoder_forward(s.params, s.input, s.sizes, s.cfg.dropout_p,
                                         true, dropout_rng);
        Graph& g = fp.graph;
        const int color = g.mse_channels(fp.reconstruction, s.target.values,
                                         s.target.color_begin, s.target.color_end);
        const int spatial = g.mse_channels(fp.reconstruction, s.target.values,
                                           s.target.spatial_begin, s.target.spatial_end);
        const int total =
            g.weighted_sum(1.0 - s.cfg.lambda, color, s.cfg.lambda, spatial);
        g.backward(total);
        benchmark::DoNotOptimize(g.grad(fp.head_id).data.data());
    }
}
BENCHMARK(BM_ForwardBackward);

void BM_AdamStep(benchmark::State& state) {
    Rng rng(3);
    Tensor value = random_tensor(rng, 64, 64, 1);
    const Tensor grad = random_tensor(rng, 64, 64, 1);
    AdamState adam;
    const std::vector<ParamRef> refs = {{&value, &grad, "value"}};
    for (auto _ : state) {
        adam_step(adam, refs);
        benchmark::DoNotOptimize(value.data.data());
    }
}
BENCHMARK(BM_AdamStep);

void BM_ExtractEmbeddings(benchmark::State& state) {
    DecoderConfig cfg;
    cfg.channels = 16;
    cfg.blocks = 2;
    cfg.ensemble = 1;
    cfg.steps = 30;
    cfg.lr_decay_step = 20;
    Rng rng(4);
    RgbImage img(16, 16);
    for (double& v : img.values) v = rng.uniform(0.0, 1.0);
    const FitImage fit_img = FitImage::from_rgb(img);
    for (auto _ : state)
        benchmark::DoNotOptimize(extract_embeddings(fit_img, cfg).features.data.data());
}
BENCHMARK(BM_ExtractEmbeddings);

void BM_Cluster(benchmark::State& state) {
    Rng rng(5);
    EmbeddingMap emb;
    emb.dims = 16;
    emb.width = 96;
    emb.height = 96;
    emb.features = random_tensor(rng, emb.dims, emb.width, emb.height);
    for (auto _ : state) {
        Rng crng(6);
        benchmark::DoNotOptimize(cluster(emb, 100, crng).labels.data());
    }
}
BENCHMARK(BM_Cluster);

void BM_Evaluate(benchmark::State& state) {
    Rng rng(7);
    const Labeling sp = random_labeling(rng, 128, 128, 200);
    const std::vector<Labeling> gts = {random_labeling(rng, 128, 128, 12)};
    for (auto _ : state) benchmark::DoNotOptimize(evaluate(sp, gts).use);
}
BENCHMARK(BM_Evaluate);

void BM_WeberAndThreshold(benchmark::State& state) {
    Rng rng(8);
    GrayImage slice(128, 128);
    for (double& v : slice.values) v = rng.uniform(0.1, 0.9);
    const Labeling sp = [&] {
        Rng r(9);
        EmbeddingMap emb;
        emb.dims = 4;
        emb.width = 128;
        emb.height = 128;
        emb.features = random_tensor(r, 4, 128, 128);
        Rng crng(10);
        return cluster(emb, 150, crng);
    }();
    for (auto _ : state) {
        const WeberMap wm = weber_map(slice, sp);
        benchmark::DoNotOptimize(li_threshold(wm.coefficients));
    }
}
BENCHMARK(BM_WeberAndThreshold);

} // namespace

BENCHMARK_MAIN();
