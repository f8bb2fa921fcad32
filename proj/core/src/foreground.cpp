#include "esseg/foreground.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include "esseg/clustering.hpp"
#include "esseg/errors.hpp"

namespace esseg {

WeberMap weber_map(const GrayImage& slice, const Labeling& sp) {
    check_labeling(sp, "weber_map");
    if (slice.width != sp.width || slice.height != sp.height)
        throw shape_error("weber_map: slice and labeling sizes differ");
    const int n = sp.num_labels;

    std::vector<double> sum(std::size_t(n), 0.0);
    std::vector<long long> count(std::size_t(n), 0);
    for (int y = 0; y < sp.height; ++y)
        for (int x = 0; x < sp.width; ++x) {
            const int lab = sp.at(x, y);
            sum[std::size_t(lab)] += slice.at(x, y);
            ++count[std::size_t(lab)];
        }

    // Superpixel adjacency from 4-neighbor label changes.
    std::vector<std::vector<int>> adjacent(static_cast<std::size_t>(n));
    auto note = [&](int a, int b) {
        auto& va = adjacent[std::size_t(a)];
        if (std::find(va.begin(), va.end(), b) == va.end()) va.push_back(b);
    };
    for (int y = 0; y < sp.height; ++y)
        for (int x = 0; x < sp.width; ++x) {
            const int v = sp.at(x, y);
            if (x + 1 < sp.width && sp.at(x + 1, y) != v) {
                note(v, sp.at(x + 1, y));
                note(sp.at(x + 1, y), v);
            }
            if (y + 1 < sp.height && sp.at(x, y + 1) != v) {
                note(v, sp.at(x, y + 1));
                note(sp.at(x, y + 1), v);
            }
        }

    WeberMap out;
    out.coefficients.assign(std::size_t(n), 0.0);
    for (int lab = 0; lab < n; ++lab) {
        if (count[std::size_t(lab)] == 0) continue;
        double nb_sum = 0.0;
        long long nb_count = 0;
        for (const int other : adjacent[std::size_t(lab)]) {
            nb_sum += sum[std::size_t(other)];
            nb_count += count[std::size_t(other)];
        }
        const double nb_mean = nb_count > 0 ? nb_sum / double(nb_count) : 0.0;
        if (nb_mean <= 1e-6) {
            std::cerr << "warning: weber_map: superpixel " << lab
                      << " has a flat or empty neighborhood; coefficient set to 0\n";
            continue;
        }
        const double mean = sum[std::size_t(lab)] / double(count[std::size_t(lab)]);
        out.coefficients[std::size_t(lab)] = (mean - nb_mean) / nb_mean;
    }

    out.map.width = sp.width;
    out.map.height = sp.height;
    out.map.values.resize(sp.pixels());
    for (std::size_t p = 0; p < sp.pixels(); ++p)
        out.map.values[p] = out.coefficients[std::size_t(sp.labels[p])];
    return out;
}

double li_threshold(const std::vector<double>& values) {
    if (values.empty()) throw param_error("li_threshold: no values");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    const double range = hi - lo;
    if (!(range > 0.0))
        throw numeric_error("li_threshold: all values are equal; no threshold exists");

    // Strictly positive working copy; the cross-entropy means need logs.
    const double shift = -lo + 1e-6 * range;
    std::vector<double> v(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) v[i] = values[i] + shift;

    double t = 0.0;
    for (const double x : v) t += x;
    t /= double(v.size());

    for (int iter = 0; iter < 100; ++iter) {
        double below_sum = 0.0, above_sum = 0.0;
        long long below_n = 0, above_n = 0;
        for (const double x : v) {
            if (x <= t) {
                below_sum += x;
                ++below_n;
            } else {
                above_sum += x;
                ++above_n;
            }
        }
        if (below_n == 0 || above_n == 0) break; // cannot happen mid-iteration; guard anyway
        const double mu_b = below_sum / double(below_n);
        const double mu_a = above_sum / double(above_n);
        if (!(mu_a > mu_b)) break;
        const double next = (mu_b - mu_a) / (std::log(mu_b) - std::log(mu_a));
        const double dt = std::fabs(next - t);
        t = next;
        if (dt < 1e-7 * range) break;
    }
    return t - shift;
}

SliceSegmentation segment_slice(const GrayImage& slice, const DecoderConfig& cfg,
                                const SegmentOptions& opts) {
    const EmbeddingMap emb =
        extract_embeddings(FitImage::from_gray(slice), cfg, opts.threads);
    Rng rng = cluster_rng(cfg.seed);
    ClusterOptions copts;
    copts.threads = opts.threads;

    SliceSegmentation out;
    out.superpixels = cluster(emb, opts.clusters, rng, copts);
    out.weber = weber_map(slice, out.superpixels);
    out.threshold = li_threshold(opts.domain == ThresholdDomain::per_superpixel
                                     ? out.weber.coefficients
                                     : out.weber.map.values);
    out.mask = BinaryMask(slice.width, slice.height);
    for (std::size_t p = 0; p < out.mask.values.size(); ++p)
        out.mask.values[p] =
            out.weber.coefficients[std::size_t(out.superpixels.labels[p])] > out.threshold
                ? 1
                : 0;
    return out;
}

} // namespace esseg
