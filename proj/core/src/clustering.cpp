#include "esseg/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "esseg/errors.hpp"
#include "esseg/filters.hpp"

namespace esseg {

GridShape grid_seed_count(int requested, int width, int height) {
    if (requested < 1) throw param_error("grid_seed_count: cluster count must be >= 1");
    if (width < 1 || height < 1) throw param_error("grid_seed_count: empty image");
    const int n_w =
        int(std::floor(std::sqrt(double(requested) * double(width) / double(height))));
    const int n_h = n_w > 0 ? requested / n_w : 0;
    if (n_w < 1 || n_h < 1)
        throw param_error("grid_seed_count: " + std::to_string(requested) +
                          " clusters are too few for a " + std::to_string(width) + "x" +
                          std::to_string(height) + " grid; request more clusters");
    return {n_w, n_h};
}

std::vector<Seed> grid_seeds(GridShape shape, int width, int height) {
    if (shape.n_w < 1 || shape.n_h < 1) throw param_error("grid_seeds: empty grid");
    if (width < 1 || height < 1) throw param_error("grid_seeds: empty image");
    std::vector<Seed> seeds;
    seeds.reserve(std::size_t(shape.count()));
    for (int j = 0; j < shape.n_h; ++j) {
        const int y = int((2LL * j + 1) * height / (2LL * shape.n_h));
        for (int i = 0; i < shape.n_w; ++i) {
            const int x = int((2LL * i + 1) * width / (2LL * shape.n_w));
            seeds.push_back({x, y});
        }
    }
    return seeds;
}

void perturb_seeds(std::vector<Seed>& seeds, const EmbeddingMap& embedding) {
    const GrayImage grad = mean_gradient_magnitude(embedding.features);
    const int w = grad.width, h = grad.height;
    for (auto& s : seeds) {
        if (s.x < 0 || s.x >= w || s.y < 0 || s.y >= h)
            throw param_error("perturb_seeds: seed outside the image");
        int bx = s.x, by = s.y;
        double best = std::numeric_limits<double>::infinity();
        for (int y = std::max(0, s.y - 2); y <= std::min(h - 1, s.y + 2); ++y)
            for (int x = std::max(0, s.x - 2); x <= std::min(w - 1, s.x + 2); ++x)
                if (grad.at(x, y) < best) {
                    best = grad.at(x, y);
                    bx = x;
                    by = y;
                }
        s = {bx, by};
    }
}

namespace {

// Repairs connectivity in place: per label ascending over the live map, keep
// the largest 4-connected component and paint each remaining fragment onto a
// random 4-adjacent label. Painting a connected fragment onto a label it
// touches keeps that label connected, and two fragments of one label are
// never adjacent, so one ascending pass leaves every label connected.
void connect_pass(std::vector<int>& labels, int width, int height, int num_labels,
                  Rng& rng) {
    const std::size_t np = labels.size();
    std::vector<int> comp_of(np, -1);
    std::vector<int> members, stack, fragment, neighbors;
    std::vector<std::size_t> comp_size;

    for (int lab = 0; lab < num_labels; ++lab) {
        members.clear();
        for (std::size_t p = 0; p < np; ++p)
            if (labels[p] == lab) members.push_back(int(p));
        if (members.size() <= 1) continue;

        for (const int p : members) comp_of[p] = -1;
        comp_size.clear();
        int ncomp = 0;
        for (const int start : members) {
            if (comp_of[start] >= 0) continue;
            std::size_t size = 0;
            stack.assign(1, start);
            comp_of[start] = ncomp;
            while (!stack.empty()) {
                const int p = stack.back();
                stack.pop_back();
                ++size;
                const int x = p % width, y = p / width;
                const int nb[4] = {x > 0 ? p - 1 : -1, x + 1 < width ? p + 1 : -1,
                                   y > 0 ? p - width : -1, y + 1 < height ? p + width : -1};
                for (const int q : nb)
                    if (q >= 0 && labels[q] == lab && comp_of[q] < 0) {
                        comp_of[q] = ncomp;
                        stack.push_back(q);
                    }
            }
            comp_size.push_back(size);
            ++ncomp;
        }
        if (ncomp == 1) continue;

        // Largest component wins; ties go to the one discovered first, i.e.
        // the one whose first pixel comes earliest in row-major order.
        int keep = 0;
        for (int c = 1; c < ncomp; ++c)
            if (comp_size[c] > comp_size[keep]) keep = c;

        for (int c = 0; c < ncomp; ++c) {
            if (c == keep) continue;
            fragment.clear();
            for (const int p : members)
                if (comp_of[p] == c) fragment.push_back(p);
            neighbors.clear();
            for (const int p : fragment) {
                const int x = p % width, y = p / width;
                const int nb[4] = {x > 0 ? p - 1 : -1, x + 1 < width ? p + 1 : -1,
                                   y > 0 ? p - width : -1, y + 1 < height ? p + width : -1};
                for (const int q : nb)
                    if (q >= 0 && labels[q] != lab) neighbors.push_back(labels[q]);
            }
            std::sort(neighbors.begin(), neighbors.end());
            neighbors.erase(std::unique(neighbors.begin(), neighbors.end()),
                            neighbors.end());
            const int target = neighbors[rng.uniform_int(neighbors.size())];
            for (const int p : fragment) labels[p] = target;
        }
    }
}

// Drops empty labels and renumbers the rest ascending.
void compact_labels(Labeling& l, int max_labels) {
    std::vector<char> used(std::size_t(max_labels), 0);
    for (const int v : l.labels) used[v] = 1;
    std::vector<int> remap(std::size_t(max_labels), -1);
    int next = 0;
    for (int lab = 0; lab < max_labels; ++lab)
        if (used[lab]) remap[lab] = next++;
    for (int& v : l.labels) v = remap[v];
    l.num_labels = next;
}

} // namespace

Labeling cluster(const EmbeddingMap& embedding, int requested, Rng& rng,
                 const ClusterOptions& opts) {
    const int w = embedding.width, h = embedding.height, dims = embedding.dims;
    if (w < 1 || h < 1 || dims < 1) throw shape_error("cluster: empty embedding");
    if (embedding.features.channels != dims || embedding.features.width != w ||
        embedding.features.height != h)
        throw shape_error("cluster: feature tensor does not match the declared shape");
    const std::size_t np = std::size_t(w) * std::size_t(h);
    if (requested < 1) throw param_error("cluster: cluster count must be >= 1");
    if (std::size_t(requested) > np)
        throw param_error("cluster: " + std::to_string(requested) +
                          " clusters exceed the " + std::to_string(np) + " pixels");
    if (opts.max_iterations < 1) throw param_error("cluster: max_iterations must be >= 1");
    if (opts.convergence_fraction < 0.0)
        throw param_error("cluster: convergence_fraction must be >= 0");

    std::vector<Seed> seeds = grid_seeds(grid_seed_count(requested, w, h), w, h);
    if (w >= 2 && h >= 2) perturb_seeds(seeds, embedding);
    const int K = int(seeds.size());

    // Pixel-major copy of the features so one pixel's vector is contiguous.
    std::vector<double> feat(np * std::size_t(dims));
    for (int c = 0; c < dims; ++c) {
        const double* src = embedding.features.channel(c);
        for (std::size_t p = 0; p < np; ++p) feat[p * dims + c] = src[p];
    }

    std::vector<double> centers(std::size_t(K) * dims), cx(K), cy(K);
    for (int k = 0; k < K; ++k) {
        const std::size_t p = std::size_t(seeds[k].y) * w + seeds[k].x;
        std::copy_n(&feat[p * dims], dims, &centers[std::size_t(k) * dims]);
        cx[k] = seeds[k].x;
        cy[k] = seeds[k].y;
    }

    std::vector<int> labels(np, -1), prev(np);
    const double step = std::sqrt(double(np) / double(K));
    const double radius = opts.centroid_window > 0.0 ? opts.centroid_window * step : -1.0;

    const auto assign_rows = [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y)
            for (int x = 0; x < w; ++x) {
                const double* f = &feat[(std::size_t(y) * w + x) * dims];
                int best = -1;
                double best_d = std::numeric_limits<double>::infinity();
                double best_sd = std::numeric_limits<double>::infinity();
                for (int k = 0; k < K; ++k) {
                    const double dx = x - cx[k], dy = y - cy[k];
                    if (radius > 0.0 &&
                        std::max(std::fabs(dx), std::fabs(dy)) > radius)
                        continue;
                    const double* c = &centers[std::size_t(k) * dims];
                    double d = 0.0;
                    for (int j = 0; j < dims; ++j) {
                        const double t = f[j] - c[j];
                        d += t * t;
                    }
                    const double sd = dx * dx + dy * dy;
                    if (d < best_d || (d == best_d && sd < best_sd)) {
                        best = k;
                        best_d = d;
                        best_sd = sd;
                    }
                }
                if (best < 0) {
                    // Nothing inside the window; take the spatially nearest
                    // centroid so every pixel gets a label.
                    for (int k = 0; k < K; ++k) {
                        const double dx = x - cx[k], dy = y - cy[k];
                        const double sd = dx * dx + dy * dy;
                        if (sd < best_sd) {
                            best = k;
                            best_sd = sd;
                        }
                    }
                }
                labels[std::size_t(y) * w + x] = best;
            }
    };

    const int workers = std::clamp(opts.threads, 1, h);
    std::vector<double> acc(std::size_t(K) * dims);
    std::vector<double> acc_x(K), acc_y(K);
    std::vector<long long> counts(K);

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        prev = labels;

        if (workers == 1) {
            assign_rows(0, h);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(std::size_t(workers));
            for (int t = 0; t < workers; ++t) {
                const int y0 = int(std::size_t(t) * h / workers);
                const int y1 = int(std::size_t(t + 1) * h / workers);
                pool.emplace_back(assign_rows, y0, y1);
            }
            for (auto& t : pool) t.join();
        }

        std::fill(acc.begin(), acc.end(), 0.0);
        std::fill(acc_x.begin(), acc_x.end(), 0.0);
        std::fill(acc_y.begin(), acc_y.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t p = 0; p < np; ++p) {
            const int k = labels[p];
            ++counts[k];
            acc_x[k] += double(p % std::size_t(w));
            acc_y[k] += double(p / std::size_t(w));
            const double* f = &feat[p * dims];
            double* a = &acc[std::size_t(k) * dims];
            for (int j = 0; j < dims; ++j) a[j] += f[j];
        }
        // Means use one correctly-rounded division, not a reciprocal multiply:
        // the mean of identical values must come back bit-exact or a cluster
        // in a flat region drifts an ulp away and forfeits every tie.
        for (int k = 0; k < K; ++k) {
            if (counts[k] == 0) continue; // keep the stale mean; may re-acquire pixels
            const double n = double(counts[k]);
            cx[k] = acc_x[k] / n;
            cy[k] = acc_y[k] / n;
            double* c = &centers[std::size_t(k) * dims];
            const double* a = &acc[std::size_t(k) * dims];
            for (int j = 0; j < dims; ++j) c[j] = a[j] / n;
        }

        connect_pass(labels, w, h, K, rng);

        std::size_t changed = 0;
        for (std::size_t p = 0; p < np; ++p)
            if (labels[p] != prev[p]) ++changed;
        if (double(changed) < opts.convergence_fraction * double(np)) break;
    }

    Labeling out;
    out.width = w;
    out.height = h;
    out.num_labels = K;
    out.labels = std::move(labels);
    compact_labels(out, K);
    return out;
}

Labeling enforce_connectivity(const Labeling& labeling, Rng& rng) {
    check_labeling(labeling, "enforce_connectivity");
    Labeling out = labeling;
    connect_pass(out.labels, out.width, out.height, out.num_labels, rng);
    return out;
}

} // namespace esseg
