#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "esseg/errors.hpp"
#include "esseg/foreground.hpp"
#include "esseg/metrics.hpp"
#include "esseg/rng.hpp"
#include "support/oracles.hpp"
#include "support/test_images.hpp"

using namespace esseg;

namespace {

// Vertical strips of the given widths and intensities.
void make_strips(const std::vector<int>& widths, const std::vector<double>& values,
                 int height, GrayImage& img, Labeling& sp) {
    int total = 0;
    for (const int w : widths) total += w;
    img = GrayImage(total, height);
    sp = Labeling(total, height, int(widths.size()));
    int x0 = 0;
    for (std::size_t s = 0; s < widths.size(); ++s) {
        for (int x = x0; x < x0 + widths[s]; ++x)
            for (int y = 0; y < height; ++y) {
                img.at(x, y) = values[s];
                sp.at(x, y) = int(s);
            }
        x0 += widths[s];
    }
}

} // namespace

TEST_CASE("weber map: documented two-strip instances") {
    GrayImage img;
    Labeling sp;
    make_strips({3, 3}, {1.5, 1.0}, 4, img, sp);
    const WeberMap wm = weber_map(img, sp);
    REQUIRE(wm.coefficients.size() == 2);
    CHECK(wm.coefficients[0] == doctest::Approx(0.5).epsilon(1e-12));

    make_strips({3, 3}, {0.2, 0.1}, 4, img, sp);
    const WeberMap wm2 = weber_map(img, sp);
    CHECK(wm2.coefficients[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(wm2.coefficients[1] == doctest::Approx(-0.5).epsilon(1e-12));

    // equal means contrast to zero
    make_strips({2, 2}, {0.7, 0.7}, 3, img, sp);
    const WeberMap wm3 = weber_map(img, sp);
    CHECK(wm3.coefficients[0] == 0.0);
    CHECK(wm3.coefficients[1] == 0.0);
}

TEST_CASE("weber map: neighborhood is the pixel union of adjacent superpixels") {
    GrayImage img;
    Labeling sp;
    make_strips({1, 1, 2}, {0.1, 0.5, 0.9}, 5, img, sp);
    const WeberMap wm = weber_map(img, sp);
    // strip 1 sees 1 column of 0.1 and 2 columns of 0.9: pixel-weighted mean
    const double nb = (0.1 * 5.0 + 0.9 * 10.0) / 15.0;
    CHECK(wm.coefficients[1] == doctest::Approx((0.5 - nb) / nb).epsilon(1e-12));

    // the map carries its superpixel's coefficient at every pixel
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 4; ++x)
            CHECK(wm.map.at(x, y) == wm.coefficients[std::size_t(sp.at(x, y))]);
}

TEST_CASE("weber map: black surroundings yield coefficient zero") {
    GrayImage img;
    Labeling sp;
    make_strips({3, 3}, {0.0, 0.5}, 4, img, sp);
    const WeberMap wm = weber_map(img, sp);
    CHECK(wm.coefficients[1] == 0.0); // neighborhood mean 0 is guarded
    CHECK(wm.coefficients[0] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("weber coefficients are invariant under intensity scaling") {
    Rng rng(7);
    GrayImage img(12, 9);
    for (double& v : img.values) v = rng.uniform(0.1, 1.0);
    Labeling sp(12, 9, 6);
    for (int y = 0; y < 9; ++y)
        for (int x = 0; x < 12; ++x) sp.at(x, y) = (x / 4) + 3 * (y / 5);

    const WeberMap base = weber_map(img, sp);

    GrayImage doubled = img;
    for (double& v : doubled.values) v *= 2.0;
    const WeberMap twice = weber_map(doubled, sp);
    for (std::size_t i = 0; i < base.coefficients.size(); ++i)
        CHECK(std::fabs(twice.coefficients[i] - base.coefficients[i]) <= 1e-10);

    GrayImage scaled = img;
    for (double& v : scaled.values) v *= 1.7;
    const WeberMap odd = weber_map(scaled, sp);
    for (std::size_t i = 0; i < base.coefficients.size(); ++i)
        CHECK(std::fabs(odd.coefficients[i] - base.coefficients[i]) <= 1e-10);
}

TEST_CASE("li threshold: separation, iteration bounds, errors") {
    std::vector<double> values;
    for (int i = 0; i < 50; ++i) values.push_back(0.0);
    for (int i = 0; i < 50; ++i) values.push_back(10.0);
    const double t = li_threshold(values);
    CHECK(t > 0.0);
    CHECK(t < 10.0);

    CHECK_THROWS_AS(li_threshold(std::vector<double>{}), param_error);
    CHECK_THROWS_AS(li_threshold(std::vector<double>(10, 3.5)), numeric_error);
    CHECK_THROWS_AS(li_threshold(std::vector<double>{1.0}), numeric_error);
}

TEST_CASE("li threshold: separates well-spaced gaussians") {
    Rng rng(11);
    std::vector<double> values;
    std::vector<int> origin;
    for (int i = 0; i < 1000; ++i) {
        values.push_back(1.0 + 0.1 * rng.normal());
        origin.push_back(0);
    }
    for (int i = 0; i < 1000; ++i) {
        values.push_back(5.0 + 0.1 * rng.normal());
        origin.push_back(1);
    }
    const double t = li_threshold(values);
    int wrong = 0;
    for (std::size_t i = 0; i < values.size(); ++i)
        if ((values[i] > t) != (origin[i] == 1)) ++wrong;
    CHECK(wrong < 20); // < 1% of 2000
}

TEST_CASE("li threshold: affine equivariance and scan agreement") {
    Rng rng(13);
    for (int inst = 0; inst < 20; ++inst) {
        std::vector<double> values;
        const double mu1 = rng.uniform(-2.0, 0.0), mu2 = rng.uniform(1.0, 4.0);
        const double s1 = rng.uniform(0.05, 0.4), s2 = rng.uniform(0.05, 0.4);
        const int n1 = 40 + int(rng.uniform_int(200)), n2 = 40 + int(rng.uniform_int(200));
        for (int i = 0; i < n1; ++i) values.push_back(mu1 + s1 * rng.normal());
        for (int i = 0; i < n2; ++i) values.push_back(mu2 + s2 * rng.normal());

        const double t = li_threshold(values);

        // the fixed point lands on the same side assignment as a brute-force
        // cross-entropy scan
        const double scan_t = oracles::cross_entropy_scan(values);
        CHECK(oracles::same_sides(values, t, scan_t));

        // affine equivariance
        const double a = rng.uniform(0.5, 3.0), b = rng.uniform(-2.0, 2.0);
        std::vector<double> mapped(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) mapped[i] = a * values[i] + b;
        const double tm = li_threshold(mapped);
        const auto [lo, hi] = std::minmax_element(mapped.begin(), mapped.end());
        CHECK(std::fabs(tm - (a * t + b)) <= 1e-6 * (*hi - *lo) + 1e-9);
    }
}

TEST_CASE("segment_slice: phantom smoke test, determinism, structure") {
    BinaryMask truth;
    const GrayImage slice = test_images::tube_phantom(32, 32, 4.0, 0.03, 5, &truth);

    DecoderConfig cfg;
    cfg.channels = 8;
    cfg.blocks = 2;
    cfg.steps = 60;
    cfg.lr_decay_step = 45;
    cfg.ensemble = 2;
    cfg.seed = 3;

    SegmentOptions opts;
    opts.clusters = 36;
    const SliceSegmentation seg = segment_slice(slice, cfg, opts);
    CHECK(seg.mask.width == 32);
    CHECK(seg.mask.height == 32);
    CHECK(std::isfinite(seg.threshold));
    CHECK(seg.superpixels.num_labels <= 36);
    CHECK(seg.weber.coefficients.size() == std::size_t(seg.superpixels.num_labels));

    // the mask is a union of whole superpixels, consistent with the threshold
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
            const int lab = seg.superpixels.at(x, y);
            const bool want = seg.weber.coefficients[std::size_t(lab)] > seg.threshold;
            CHECK(seg.mask.at(x, y) == want);
        }

    const SliceSegmentation again = segment_slice(slice, cfg, opts);
    CHECK(again.mask.values == seg.mask.values);
    CHECK(again.superpixels.labels == seg.superpixels.labels);
    CHECK(again.threshold == seg.threshold);

    // the per-pixel threshold domain also produces a whole-superpixel mask
    SegmentOptions pixel_opts = opts;
    pixel_opts.domain = ThresholdDomain::per_pixel;
    const SliceSegmentation px = segment_slice(slice, cfg, pixel_opts);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
            const int lab = px.superpixels.at(x, y);
            CHECK(px.mask.at(x, y) ==
                  (px.weber.coefficients[std::size_t(lab)] > px.threshold));
        }

    // constant slices cannot be thresholded; 0.5 is exactly representable,
    // so every superpixel mean and contrast coefficient comes out exactly
    // equal and the threshold step must refuse
    const GrayImage flat(32, 32, 0.5);
    CHECK_THROWS_AS(segment_slice(flat, cfg, opts), numeric_error);
}
