#include "esseg/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <utility>

#include "esseg/connectivity.hpp"
#include "esseg/errors.hpp"

namespace esseg {

namespace {

void require_same_shape(const Labeling& a, const Labeling& b, const std::string& who) {
    if (a.width != b.width || a.height != b.height)
        throw shape_error(who + ": " + std::to_string(a.width) + "x" +
                          std::to_string(a.height) + " vs " + std::to_string(b.width) +
                          "x" + std::to_string(b.height));
}

std::vector<long long> label_sizes(const Labeling& l) {
    std::vector<long long> sizes(std::size_t(l.num_labels), 0);
    for (const int v : l.labels) ++sizes[std::size_t(v)];
    return sizes;
}

struct Overlap {
    int a = 0; // outer label
    int b = 0; // inner label
    long long count = 0;
};

// Per-(a, b) intersection sizes, sorted by a then b. Sparse by construction,
// so arbitrary label counts stay cheap.
std::vector<Overlap> overlaps(const Labeling& outer, const Labeling& inner) {
    std::vector<std::pair<int, int>> pairs(outer.labels.size());
    for (std::size_t p = 0; p < pairs.size(); ++p)
        pairs[p] = {outer.labels[p], inner.labels[p]};
    std::sort(pairs.begin(), pairs.end());
    std::vector<Overlap> out;
    for (std::size_t p = 0; p < pairs.size();) {
        std::size_t q = p;
        while (q < pairs.size() && pairs[q] == pairs[p]) ++q;
        out.push_back({pairs[p].first, pairs[p].second, (long long)(q - p)});
        p = q;
    }
    return out;
}

} // namespace

int count_regions(const Labeling& labeling) {
    check_labeling(labeling, "count_regions");
    std::vector<int> component;
    return component_map(labeling.labels, labeling.width, labeling.height, component);
}

double undersegmentation_error(const Labeling& sp, const Labeling& gt,
                               double min_overlap_fraction, UseVariant variant) {
    check_labeling(sp, "undersegmentation_error");
    check_labeling(gt, "undersegmentation_error");
    require_same_shape(sp, gt, "undersegmentation_error");
    if (min_overlap_fraction < 0.0 || min_overlap_fraction >= 1.0)
        throw param_error("undersegmentation_error: overlap fraction must be in [0,1)");
    const std::vector<long long> sizes = label_sizes(sp);
    const long long n = (long long)sp.pixels();
    long long acc = 0;
    for (const Overlap& o : overlaps(gt, sp)) {
        const long long size = sizes[std::size_t(o.b)];
        if (!(double(o.count) > min_overlap_fraction * double(size))) continue;
        acc += variant == UseVariant::total_overlap ? size
                                                    : std::min(o.count, size - o.count);
    }
    if (variant == UseVariant::total_overlap) acc -= n;
    return double(acc) / double(n);
}

BinaryMask boundary_mask(const Labeling& l) {
    BinaryMask b(l.width, l.height);
    for (int y = 0; y < l.height; ++y)
        for (int x = 0; x < l.width; ++x) {
            const int v = l.at(x, y);
            const bool edge = (x > 0 && l.at(x - 1, y) != v) ||
                              (x + 1 < l.width && l.at(x + 1, y) != v) ||
                              (y > 0 && l.at(x, y - 1) != v) ||
                              (y + 1 < l.height && l.at(x, y + 1) != v);
            if (edge) b.set(x, y, true);
        }
    return b;
}

double boundary_recall(const Labeling& sp, const Labeling& gt) {
    check_labeling(sp, "boundary_recall");
    check_labeling(gt, "boundary_recall");
    require_same_shape(sp, gt, "boundary_recall");
    const BinaryMask sp_b = boundary_mask(sp);
    const BinaryMask gt_b = boundary_mask(gt);
    long long total = 0, hit = 0;
    for (int y = 0; y < gt.height; ++y)
        for (int x = 0; x < gt.width; ++x) {
            if (!gt_b.at(x, y)) continue;
            ++total;
            bool found = false;
            for (int yy = std::max(0, y - 2); !found && yy <= std::min(gt.height - 1, y + 2);
                 ++yy)
                for (int xx = std::max(0, x - 2); xx <= std::min(gt.width - 1, x + 2); ++xx)
                    if (sp_b.at(xx, yy)) {
                        found = true;
                        break;
                    }
            if (found) ++hit;
        }
    if (total == 0) return 1.0;
    return double(hit) / double(total);
}

double achievable_segmentation_accuracy(const Labeling& sp, const Labeling& gt) {
    check_labeling(sp, "achievable_segmentation_accuracy");
    check_labeling(gt, "achievable_segmentation_accuracy");
    require_same_shape(sp, gt, "achievable_segmentation_accuracy");
    long long acc = 0, run_max = 0;
    int run_label = -1;
    for (const Overlap& o : overlaps(sp, gt)) {
        if (o.a != run_label) {
            acc += run_max;
            run_label = o.a;
            run_max = 0;
        }
        run_max = std::max(run_max, o.count);
    }
    acc += run_max;
    return double(acc) / double(sp.pixels());
}

double compactness(const Labeling& sp) {
    check_labeling(sp, "compactness");
    const std::vector<long long> sizes = label_sizes(sp);
    std::vector<long long> perim(std::size_t(sp.num_labels), 0);
    for (int y = 0; y < sp.height; ++y)
        for (int x = 0; x < sp.width; ++x) {
            const int v = sp.at(x, y);
            long long edges = 0;
            if (x == 0 || sp.at(x - 1, y) != v) ++edges;
            if (x + 1 == sp.width || sp.at(x + 1, y) != v) ++edges;
            if (y == 0 || sp.at(x, y - 1) != v) ++edges;
            if (y + 1 == sp.height || sp.at(x, y + 1) != v) ++edges;
            perim[std::size_t(v)] += edges;
        }
    double acc = 0.0;
    for (int lab = 0; lab < sp.num_labels; ++lab) {
        const double size = double(sizes[std::size_t(lab)]);
        if (size <= 0.0) continue;
        const double pm = double(perim[std::size_t(lab)]);
        const double quotient = (4.0 * std::numbers::pi * size) / (pm * pm);
        acc += size * std::min(1.0, quotient);
    }
    return acc / double(sp.pixels());
}

MetricReport evaluate(const Labeling& sp, const std::vector<Labeling>& gts) {
    if (gts.empty()) throw param_error("evaluate: at least one ground truth is required");
    MetricReport report;
    report.per_gt.reserve(gts.size());
    for (const Labeling& gt : gts) {
        MetricReport::PerAnnotation a;
        a.use = undersegmentation_error(sp, gt);
        a.br = boundary_recall(sp, gt);
        a.asa = achievable_segmentation_accuracy(sp, gt);
        report.per_gt.push_back(a);
        report.use += a.use;
        report.br += a.br;
        report.asa += a.asa;
    }
    const double inv = 1.0 / double(gts.size());
    report.use *= inv;
    report.br *= inv;
    report.asa *= inv;
    report.co = compactness(sp);
    report.num_regions = count_regions(sp);
    return report;
}

ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& gold) {
    if (pred.width != gold.width || pred.height != gold.height)
        throw shape_error("confusion: mask sizes differ");
    ConfusionCounts c;
    for (std::size_t p = 0; p < pred.values.size(); ++p) {
        const bool pv = pred.values[p] != 0, gv = gold.values[p] != 0;
        if (pv && gv)
            ++c.tp;
        else if (!pv && !gv)
            ++c.tn;
        else if (pv)
            ++c.fp;
        else
            ++c.fn;
    }
    return c;
}

BinaryMetrics binary_metrics(const BinaryMask& pred, const BinaryMask& gold) {
    BinaryMetrics m;
    m.counts = confusion(pred, gold);
    const ConfusionCounts& c = m.counts;
    m.se = c.tp + c.fn > 0 ? double(c.tp) / double(c.tp + c.fn) : (c.fp == 0 ? 1.0 : 0.0);
    m.sp = c.tn + c.fp > 0 ? double(c.tn) / double(c.tn + c.fp) : (c.fn == 0 ? 1.0 : 0.0);
    const long long dice_den = 2 * c.tp + c.fp + c.fn;
    m.dc = dice_den > 0 ? 2.0 * double(c.tp) / double(dice_den) : 1.0;
    const long long jac_den = c.tp + c.fp + c.fn;
    m.ji = jac_den > 0 ? double(c.tp) / double(jac_den) : 1.0;
    return m;
}

std::string metric_report_csv(const MetricReport& report, const std::string& image_name,
                              const std::vector<std::string>& gt_names) {
    if (gt_names.size() != report.per_gt.size())
        throw param_error("metric_report_csv: one name per annotation is required");
    std::ostringstream out;
    out << std::setprecision(12);
    out << "image,ground_truth,metric,value\n";
    for (std::size_t i = 0; i < gt_names.size(); ++i) {
        const auto& a = report.per_gt[i];
        out << image_name << ',' << gt_names[i] << ",use," << a.use << '\n';
        out << image_name << ',' << gt_names[i] << ",br," << a.br << '\n';
        out << image_name << ',' << gt_names[i] << ",asa," << a.asa << '\n';
    }
    out << image_name << ",all,use," << report.use << '\n';
    out << image_name << ",all,br," << report.br << '\n';
    out << image_name << ",all,asa," << report.asa << '\n';
    out << image_name << ",all,co," << report.co << '\n';
    out << image_name << ",all,num_regions," << report.num_regions << '\n';
    return out.str();
}

} // namespace esseg
