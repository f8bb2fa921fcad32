#ifndef ESSEG_METRICS_HPP
#define ESSEG_METRICS_HPP

#include <string>
#include <vector>

#include "esseg/labeling.hpp"
#include "esseg/mask.hpp"

namespace esseg {

// Number of 4-connected components of the label map. Disconnected labels
// count once per island, so this is the honest region count for comparing
// segmentations at equal granularity.
int count_regions(const Labeling& labeling);

enum class UseVariant {
    total_overlap, // sum |S| over superpixels overlapping each segment
    min_in_out     // sum min(|S inside|, |S outside|) instead
};

// Leakage of superpixels across ground-truth boundaries, normalized by the
// pixel count N. With the default variant:
//   USE = (sum_i sum_{S: |S and G_i| > f*|S|} |S| - N) / N
// where f is min_overlap_fraction (0 counts any overlap). min_in_out
// replaces |S| by min(|S and G_i|, |S| - |S and G_i|) without subtracting N.
double undersegmentation_error(const Labeling& sp, const Labeling& gt,
                               double min_overlap_fraction = 0.0,
                               UseVariant variant = UseVariant::total_overlap);

// Pixels with at least one 4-neighbor of different label. This is the one
// boundary notion in the project; the CLI overlay draws exactly these
// pixels.
BinaryMask boundary_mask(const Labeling& labeling);

// Fraction of ground-truth boundary pixels that have a superpixel boundary
// pixel within Chebyshev distance 2. A ground truth without boundary pixels
// scores 1.
double boundary_recall(const Labeling& sp, const Labeling& gt);

// Best accuracy achievable by assigning each whole superpixel to one
// ground-truth segment: ASA = (1/N) * sum_S max_i |S and G_i|.
double achievable_segmentation_accuracy(const Labeling& sp, const Labeling& gt);

// Area-weighted isoperimetric quotient: CO = (1/N) * sum_S |S| * Q(S) with
// Q(S) = min(1, 4*pi*|S| / P(S)^2); P counts unit pixel edges adjacent to a
// different label or to the image border.
double compactness(const Labeling& sp);

struct MetricReport {
    double use = 0.0;
    double br = 0.0;
    double asa = 0.0;
    double co = 0.0;
    int num_regions = 0;

    struct PerAnnotation {
        double use = 0.0;
        double br = 0.0;
        double asa = 0.0;
    };
    std::vector<PerAnnotation> per_gt;
};

// USE/BR/ASA per ground truth, arithmetic-averaged into the headline
// numbers; CO and num_regions are properties of sp alone and computed once.
// Throws param_error when gts is empty, shape_error on size mismatch.
MetricReport evaluate(const Labeling& sp, const std::vector<Labeling>& gts);

struct ConfusionCounts {
    long long tp = 0;
    long long tn = 0;
    long long fp = 0;
    long long fn = 0;
};
ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& gold);

// Sensitivity TP/(TP+FN), specificity TN/(TN+FP), Dice 2TP/(2TP+FP+FN),
// Jaccard TP/(TP+FP+FN). An empty denominator means the quantity is absent
// from the gold mask; the score is then 1 if it is absent from the
// prediction too, else 0.
struct BinaryMetrics {
    double se = 0.0;
    double sp = 0.0;
    double dc = 0.0;
    double ji = 0.0;
    ConfusionCounts counts;
};
BinaryMetrics binary_metrics(const BinaryMask& pred, const BinaryMask& gold);

// CSV rows "image,ground_truth,metric,value": one block per annotation with
// its USE/BR/ASA, then aggregate rows (ground_truth = "all") with the
// averaged metrics plus CO and num_regions. gt_names must line up with
// report.per_gt.
std::string metric_report_csv(const MetricReport& report, const std::string& image_name,
                              const std::vector<std::string>& gt_names);

} // namespace esseg

#endif
