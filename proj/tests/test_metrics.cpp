#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "esseg/errors.hpp"
#include "esseg/metrics.hpp"
#include "esseg/rng.hpp"
#include "support/oracles.hpp"
#include "support/test_images.hpp"

using namespace esseg;

namespace {

Labeling from_rows(int w, int h, std::vector<int> labels, int num_labels) {
    Labeling l(w, h, num_labels);
    l.labels = std::move(labels);
    return l;
}

BinaryMask mask_from(int w, int h, const std::vector<int>& bits) {
    BinaryMask m(w, h);
    for (std::size_t i = 0; i < bits.size(); ++i) m.values[i] = char(bits[i]);
    return m;
}

} // namespace

TEST_CASE("count_regions: islands count separately") {
    const Labeling quad = test_images::quadrant_truth(8, 8);
    CHECK(count_regions(quad) == 4);

    // one label split into two islands
    const Labeling split = from_rows(5, 1, {0, 0, 1, 0, 0}, 2);
    CHECK(count_regions(split) == 3);
}

TEST_CASE("undersegmentation error: hand instance and degenerate cases") {
    const Labeling gt = from_rows(4, 1, {0, 0, 1, 1}, 2);
    const Labeling sp = from_rows(4, 1, {0, 0, 0, 1}, 2);
    CHECK(undersegmentation_error(sp, gt) == doctest::Approx(0.75).epsilon(1e-15));

    // identical labelings leak nothing
    CHECK(undersegmentation_error(gt, gt) == 0.0);

    // a single ground-truth segment cannot be leaked across
    const Labeling one = from_rows(4, 1, {0, 0, 0, 0}, 1);
    CHECK(undersegmentation_error(sp, one) == 0.0);

    const Labeling wrong(3, 2, 1);
    CHECK_THROWS_AS(undersegmentation_error(sp, wrong), shape_error);
    CHECK_THROWS_AS(undersegmentation_error(sp, gt, 1.0), param_error);
    CHECK_THROWS_AS(undersegmentation_error(sp, gt, -0.1), param_error);
}

TEST_CASE("undersegmentation error: overlap threshold and min-in-out variant") {
    const Labeling gt = from_rows(4, 1, {0, 0, 1, 1}, 2);
    const Labeling sp = from_rows(4, 1, {0, 0, 0, 1}, 2);
    // requiring more than a third of the superpixel inside the segment drops
    // the 1-pixel leak of s into B: only |s|>3*1/3... overlap 1 of size 3 fails
    CHECK(undersegmentation_error(sp, gt, 0.4) == 0.0);

    // min(in, out) form: s against A contributes min(2,1)=1, against B min(1,2)=1
    CHECK(undersegmentation_error(sp, gt, 0.0, UseVariant::min_in_out) ==
          doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("boundary recall: hand instances with offsets") {
    // gt boundary pixels sit in columns 3 and 4 of a 12x8 grid (both sides
    // of the label change count)
    Labeling gt(12, 8, 2);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 12; ++x) gt.at(x, y) = x < 4 ? 0 : 1;

    // sp boundary in columns 5|6: column 3 is Chebyshev 2 from column 5
    Labeling sp2(12, 8, 2);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 12; ++x) sp2.at(x, y) = x < 6 ? 0 : 1;
    CHECK(boundary_recall(sp2, gt) == 1.0);

    // sp boundary in columns 7|8: neither gt column reaches within
    // distance 2, recall 0
    Labeling sp3(12, 8, 2);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 12; ++x) sp3.at(x, y) = x < 8 ? 0 : 1;
    CHECK(boundary_recall(sp3, gt) == 0.0);

    // sp boundary in columns 6|7: column 4 reaches column 6, column 3
    // reaches nothing, so exactly half the gt boundary is recalled
    Labeling sp_half(12, 8, 2);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 12; ++x) sp_half.at(x, y) = x < 7 ? 0 : 1;
    CHECK(boundary_recall(sp_half, gt) == 0.5);

    CHECK(boundary_recall(gt, gt) == 1.0);

    // superpixels without boundaries recall nothing
    const Labeling blank(12, 8, 1);
    CHECK(boundary_recall(blank, gt) == 0.0);
    // a gt without boundary pixels scores 1 by convention
    CHECK(boundary_recall(sp2, blank) == 1.0);
}

TEST_CASE("asa: hand instances") {
    const Labeling gt = test_images::quadrant_truth(8, 8);
    CHECK(achievable_segmentation_accuracy(gt, gt) == 1.0);

    const Labeling one(8, 8, 1);
    Labeling halves(8, 8, 2);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) halves.at(x, y) = x < 4 ? 0 : 1;
    CHECK(achievable_segmentation_accuracy(one, halves) == 0.5);
}

TEST_CASE("compactness: isoperimetric hand values") {
    const Labeling square(4, 4, 1);
    CHECK(compactness(square) == doctest::Approx(std::numbers::pi / 4.0).epsilon(1e-15));

    Labeling singles(4, 4, 16);
    for (int i = 0; i < 16; ++i) singles.labels[std::size_t(i)] = i;
    CHECK(compactness(singles) == doctest::Approx(std::numbers::pi / 4.0).epsilon(1e-15));

    // a long strip is less compact than a square of equal area
    Labeling strip(16, 1, 1);
    CHECK(compactness(strip) < std::numbers::pi / 4.0);
}

TEST_CASE("metrics match the brute-force oracles exactly on random labelings") {
    Rng rng(97);
    for (int inst = 0; inst < 200; ++inst) {
        const Labeling a = oracles::random_labeling(rng);
        Labeling b = oracles::random_labeling(rng, 12, 5);
        // force matching dimensions
        b.width = a.width;
        b.height = a.height;
        b.labels.resize(a.pixels());
        for (int& v : b.labels) v = int(rng.uniform_int(std::uint64_t(b.num_labels)));

        CHECK(count_regions(a) == oracles::oracle_count_regions(a));
        CHECK(undersegmentation_error(a, b) == oracles::oracle_use(a, b));
        CHECK(undersegmentation_error(a, b, 0.3) == oracles::oracle_use(a, b, 0.3));
        CHECK(undersegmentation_error(a, b, 0.1, UseVariant::min_in_out) ==
              oracles::oracle_use(a, b, 0.1, UseVariant::min_in_out));
        CHECK(boundary_recall(a, b) == oracles::oracle_br(a, b));
        CHECK(achievable_segmentation_accuracy(a, b) == oracles::oracle_asa(a, b));
        CHECK(compactness(a) == oracles::oracle_co(a));
    }
}

TEST_CASE("refining superpixels never hurts asa or use") {
    Rng rng(101);
    for (int inst = 0; inst < 30; ++inst) {
        const Labeling gt = oracles::random_labeling(rng, 8, 4);
        Labeling sp = oracles::random_labeling(rng, 8, 4);
        sp.width = gt.width;
        sp.height = gt.height;
        sp.labels.resize(gt.pixels());
        for (int& v : sp.labels) v = int(rng.uniform_int(std::uint64_t(sp.num_labels)));

        // split one superpixel: give one of its pixels a brand-new label
        Labeling refined = sp;
        refined.num_labels = sp.num_labels + 1;
        refined.labels[rng.uniform_int(refined.pixels())] = sp.num_labels;

        CHECK(achievable_segmentation_accuracy(refined, gt) >=
              achievable_segmentation_accuracy(sp, gt));
        CHECK(undersegmentation_error(refined, gt) <= undersegmentation_error(sp, gt));
    }
}

TEST_CASE("boundary mask marks exactly the 4-neighbor disagreements") {
    const Labeling quad = test_images::quadrant_truth(6, 6);
    const BinaryMask m = boundary_mask(quad);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x)
            CHECK(m.at(x, y) == oracles::oracle_is_boundary(quad, x, y));
}

TEST_CASE("evaluate: averaging over annotations") {
    const Labeling sp = test_images::quadrant_truth(8, 8);
    Labeling coarse(8, 8, 2);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) coarse.at(x, y) = y < 4 ? 0 : 1;

    const MetricReport single = evaluate(sp, {coarse});
    CHECK(single.per_gt.size() == 1);
    CHECK(single.use == single.per_gt[0].use);
    CHECK(single.asa == doctest::Approx(1.0).epsilon(1e-15));

    const MetricReport twice = evaluate(sp, {coarse, coarse});
    CHECK(twice.use == doctest::Approx(single.use).epsilon(1e-15));
    CHECK(twice.br == doctest::Approx(single.br).epsilon(1e-15));
    CHECK(twice.asa == doctest::Approx(single.asa).epsilon(1e-15));

    const MetricReport mixed = evaluate(sp, {sp, coarse});
    const double expect_use =
        (undersegmentation_error(sp, sp) + undersegmentation_error(sp, coarse)) / 2.0;
    CHECK(mixed.use == doctest::Approx(expect_use).epsilon(1e-12));
    CHECK(mixed.co == doctest::Approx(compactness(sp)).epsilon(1e-15));
    CHECK(mixed.num_regions == 4);

    CHECK_THROWS_AS(evaluate(sp, {}), param_error);
}

TEST_CASE("confusion counts and binary metrics: hand instance") {
    // 8 pixels: TP=2, FP=1, FN=1, TN=4
    const BinaryMask pred = mask_from(8, 1, {1, 1, 1, 0, 0, 0, 0, 0});
    const BinaryMask gold = mask_from(8, 1, {1, 1, 0, 1, 0, 0, 0, 0});
    const ConfusionCounts c = confusion(pred, gold);
    CHECK(c.tp == 2);
    CHECK(c.fp == 1);
    CHECK(c.fn == 1);
    CHECK(c.tn == 4);

    const BinaryMetrics m = binary_metrics(pred, gold);
    CHECK(m.se == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(m.sp == doctest::Approx(4.0 / 5.0).epsilon(1e-15));
    CHECK(m.dc == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(m.ji == doctest::Approx(0.5).epsilon(1e-15));

    const BinaryMetrics perfect = binary_metrics(gold, gold);
    CHECK(perfect.se == 1.0);
    CHECK(perfect.sp == 1.0);
    CHECK(perfect.dc == 1.0);
    CHECK(perfect.ji == 1.0);

    // complement prediction finds nothing
    BinaryMask inv = gold;
    for (char& v : inv.values) v = v ? 0 : 1;
    const BinaryMetrics none = binary_metrics(inv, gold);
    CHECK(none.se == 0.0);
    CHECK(none.dc == 0.0);
    CHECK(none.ji == 0.0);

    const BinaryMask other(9, 1);
    CHECK_THROWS_AS(binary_metrics(other, gold), shape_error);
}

TEST_CASE("binary metrics: empty-denominator conventions") {
    const BinaryMask empty(4, 1);
    const BinaryMask full(4, 1, true);
    const BinaryMask some = mask_from(4, 1, {1, 0, 0, 0});

    // nothing to find, nothing predicted
    const BinaryMetrics ee = binary_metrics(empty, empty);
    CHECK(ee.se == 1.0);
    CHECK(ee.dc == 1.0);
    CHECK(ee.ji == 1.0);

    // nothing to find, but false alarms
    const BinaryMetrics fe = binary_metrics(some, empty);
    CHECK(fe.se == 0.0);
    CHECK(fe.dc == 0.0);
    CHECK(fe.ji == 0.0);

    // no negatives in gold: specificity follows the same convention
    const BinaryMetrics ff = binary_metrics(full, full);
    CHECK(ff.sp == 1.0);
    const BinaryMetrics sf = binary_metrics(some, full);
    CHECK(sf.sp == 0.0);
}

TEST_CASE("dice and jaccard identity on random masks") {
    Rng rng(103);
    for (int inst = 0; inst < 100; ++inst) {
        const int w = 1 + int(rng.uniform_int(10)), h = 1 + int(rng.uniform_int(10));
        BinaryMask pred(w, h), gold(w, h);
        for (char& v : pred.values) v = char(rng.bernoulli(0.4));
        for (char& v : gold.values) v = char(rng.bernoulli(0.4));
        const BinaryMetrics m = binary_metrics(pred, gold);
        CHECK(std::fabs(m.dc - 2.0 * m.ji / (1.0 + m.ji)) < 1e-12);
    }
}

TEST_CASE("metric report csv layout") {
    const Labeling sp = test_images::quadrant_truth(4, 4);
    const MetricReport r = evaluate(sp, {sp});
    const std::string csv = metric_report_csv(r, "img", {"gt0"});
    CHECK(csv.find("image,ground_truth,metric,value\n") == 0);
    CHECK(csv.find("img,gt0,use,0") != std::string::npos);
    CHECK(csv.find("img,gt0,br,1") != std::string::npos);
    CHECK(csv.find("img,gt0,asa,1") != std::string::npos);
    CHECK(csv.find("img,all,use,0") != std::string::npos);
    CHECK(csv.find("img,all,co,") != std::string::npos);
    CHECK(csv.find("img,all,num_regions,4") != std::string::npos);

    CHECK_THROWS_AS(metric_report_csv(r, "img", {"a", "b"}), param_error);
}
